#include "doctest.h"

#include "logcascade/error.hpp"
#include "logcascade/fixed.hpp"
#include "logcascade/rng.hpp"

using namespace logcascade;

TEST_CASE("fixed point round trips through mpq and hex") {
  Stream s(1, "test:fixed");
  for (int i = 0; i < 200; ++i) {
    const Fixed x = s.circle_point();
    CHECK(Fixed::from_ratio(x.to_mpq()) == x);
    CHECK(Fixed::from_hex(x.hex()) == x);
    CHECK(circle_add(x, circle_neg(x)).is_zero());
  }
  CHECK(Fixed::one().whole() == 1);
  CHECK(Fixed::from_double(0.75).hex() == "0.c" + std::string(63, '0'));
}

TEST_CASE("modular orbit steps equal multiplication") {
  Stream s(2, "test:fixed");
  const Fixed a = s.circle_point();
  Fixed x = s.circle_point();
  const Fixed start = x;
  for (int i = 0; i < 1000; ++i) x = circle_add(x, a);
  CHECK(x == circle_add(start, a.times(1000).frac()));
}

TEST_CASE("signed gap and parsing") {
  const Fixed a = parse_position("1/4");
  const Fixed b = parse_position("0.75");
  CHECK(circle_signed_gap(a, b) == doctest::Approx(0.5));
  CHECK(circle_signed_gap(b, parse_position("0.8")) == doctest::Approx(-0.05));
  CHECK(parse_decimal_exact("1e-3") == mpq_class(1, 1000));
  CHECK_THROWS_AS(parse_position("abc"), Error);
}

TEST_CASE("half and times") {
  const Fixed x = parse_position("3/8");
  CHECK(x.half() == parse_position("3/16"));
  CHECK(x.times(8).whole() == 3);
  CHECK(x.times(8).frac().is_zero());
}
