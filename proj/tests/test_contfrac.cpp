#include "doctest.h"

#include <cmath>

#include "logcascade/contfrac.hpp"
#include "logcascade/error.hpp"
#include "logcascade/rng.hpp"

using namespace logcascade;
using namespace logcascade::contfrac;

namespace {

// Digits of (P + sqrt(D)) / Q by the integer surd recurrence; independent of
// the interval expansion.
std::vector<std::uint64_t> surd_digits(long P, long D, long Q, int count) {
  mpz_class p = P, q = Q, d = D, r;
  mpz_sqrt(r.get_mpz_t(), d.get_mpz_t());
  std::vector<std::uint64_t> out;
  for (int i = 0; i <= count; ++i) {
    mpz_class a;
    mpz_class num = p + r;
    mpz_fdiv_q(a.get_mpz_t(), num.get_mpz_t(), q.get_mpz_t());
    if (i > 0) out.push_back(a.get_ui());
    p = a * q - p;
    q = (d - p * p) / q;
  }
  return out;
}

// floor(sqrt(D) * 2^bits) - k * 2^bits, the numerator of a dyadic enclosure
// of sqrt(D) - k.
mpz_class surd_numerator(long D, long k, int bits) {
  mpz_class scaled = D, root;
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * bits);
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  mpz_class shift = k;
  mpz_mul_2exp(shift.get_mpz_t(), shift.get_mpz_t(), bits);
  return root - shift;
}

FractionalValue surd_interval(long D, long k, int bits) {
  return FractionalValue::dyadic(surd_numerator(D, k, bits), bits);
}

std::vector<std::uint64_t> to_vec(std::initializer_list<unsigned> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("expansion of quadratic surds matches the surd recurrence") {
  // sqrt(5) - 1 at 512 bits read at 513 bits is (sqrt(5) - 1) / 2.
  const auto golden = expand(FractionalValue::dyadic(surd_numerator(5, 1, 512), 513), 10);
  CHECK(golden.quotients == std::vector<std::uint64_t>(10, 1));

  const auto star = expand(surd_interval(2600, 50, 512), 8);
  CHECK(star.quotients == to_vec({1, 100, 1, 100, 1, 100, 1, 100}));
  CHECK(star.quotients == surd_digits(-50, 2600, 1, 8));
  CHECK_FALSE(star.terminated);

  const auto s7 = expand(surd_interval(7, 2, 512), 40);
  CHECK(s7.quotients == surd_digits(-2, 7, 1, 40));
}

TEST_CASE("rational input terminates") {
  const auto half = expand(FractionalValue::exact(mpq_class(1, 2)), 5);
  CHECK(half.quotients == to_vec({2}));
  CHECK(half.terminated);
}

TEST_CASE("insufficient precision is reported, not guessed") {
  CHECK_THROWS_AS(expand(surd_interval(2600, 50, 64), 40), Error);
  try {
    expand(surd_interval(2600, 50, 64), 40);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PrecisionExhausted);
  }
}

TEST_CASE("expanding the value of a quotient list round trips") {
  Stream s(3, "test:roundtrip");
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint64_t> a(1 + s.below(12));
    for (auto& v : a) v = 1 + s.below(s.below(4) == 0 ? 500 : 5);
    if (a.size() == 1 && a[0] == 1) a[0] = 2;
    const auto pq = PartialQuotientSeq::explicit_list(a);
    const auto back = expand(FractionalValue::exact(pq.value()), 100);
    CHECK(back.terminated);
    CHECK(back.quotients == canonicalize(pq).quotients);
  }
}

TEST_CASE("convergent rows") {
  const auto fib = convergents(PartialQuotientSeq::explicit_list(std::vector<std::uint64_t>(6, 1)));
  const std::vector<unsigned> fq{1, 1, 2, 3, 5, 8, 13};
  for (std::size_t i = 0; i < fq.size(); ++i) CHECK(fib.q(i) == fq[i]);

  const auto t = convergents(parse_quotients("1,100,1,100,1,100,1", 0));
  const std::vector<unsigned long> q{1, 1, 101, 102, 10301, 10403, 1050601, 1061004};
  const std::vector<unsigned long> p{0, 1, 100, 101, 10200, 10301, 1040300, 1050601};
  REQUIRE(t.size() == 8);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(t.q(i) == q[i]);
    CHECK(t.p(i) == p[i]);
  }
  const auto check = verify_table(t);
  CHECK(check.ok());
  CHECK(check.sandwich_upper_attained_at_end);
}

TEST_CASE("periodic alpha star table") {
  const auto t = convergents(parse_quotients("1,100:repeat", 8));
  CHECK(t.depth() == 8);
  CHECK(t.size() > 9);
  CHECK(t.q(8) == 1061004UL * 100 + 1050601);
  const auto check = verify_table(t);
  for (const auto& f : check.failures) MESSAGE(f);
  CHECK(check.ok());
  CHECK_FALSE(check.sandwich_upper_attained_at_end);
  // alpha = sqrt(2600) - 50
  CHECK(t.alpha().to_double() == doctest::Approx(std::sqrt(2600.0) - 50.0).epsilon(1e-15));
  CHECK(t.alpha_error_log2() < -(kFracBits + 8));
  const auto ref = surd_interval(2600, 50, 256);
  const mpq_class a = t.alpha().to_mpq();
  CHECK(abs(a - ref.lo) <= mpq_class(1, 1) / (mpq_class(2, 1) * ref.hi.get_den()) * 4);
}

TEST_CASE("H(alpha) fast path agrees with exact comparison") {
  const auto t8 = convergents(parse_quotients("1,100:repeat", 8));
  CHECK(h_set(t8) == std::vector<std::size_t>{1, 3, 5, 7});
  const auto t7 = convergents(parse_quotients("1,100,1,100,1,100,1", 0));
  CHECK(h_set(t7) == std::vector<std::size_t>{1, 3, 5});
  CHECK(h_set(convergents(parse_quotients("1:repeat", 30))).empty());
  CHECK(h_set(convergents(parse_quotients("100:repeat", 7))) == std::vector<std::size_t>{1, 3, 5});
  CHECK(h_set(convergents(parse_quotients("100:repeat", 7)), true) == std::vector<std::size_t>{0, 2, 4, 6});

  Stream s(4, "test:hset");
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> a(2 + s.below(20));
    for (auto& v : a) v = 1 + s.below(s.below(2) == 0 ? 300 : 3);
    const auto t = convergents(PartialQuotientSeq::explicit_list(a));
    CHECK(h_set(t) == h_set_exact(t));
    CHECK(h_set(t, true) == h_set_exact(t, true));
    CHECK(verify_table(t).ok());
  }
}

TEST_CASE("conditions report") {
  const auto t = convergents(parse_quotients("1,100:repeat", 7));
  const auto prof = check_conditions(t, std::vector<std::size_t>{3, 5});
  REQUIRE(prof.subsequence);
  CHECK(prof.subsequence->partial_sums.back() == doctest::Approx(1 / std::log(102.0) + 1 / std::log(10403.0)));
  CHECK(prof.subsequence->partial_sums.back() == doctest::Approx(0.3245).epsilon(1e-3));
  CHECK(prof.subsequence->lower_density == doctest::Approx(1.0 / 3.0));
  CHECK(prof.subsequence->all_in_h);
  CHECK(prof.product_bounds);
  CHECK(prof.max_quotient == 100);
  CHECK_THROWS_AS(check_conditions(t, std::vector<std::size_t>{1, 3, 5}), Error);
  CHECK_THROWS_AS(check_conditions(t, std::vector<std::size_t>{5, 3}), Error);
  CHECK_THROWS_AS(check_conditions(t, std::vector<std::size_t>{9}), Error);

  const auto ones = check_conditions(convergents(parse_quotients("1:repeat", 40)));
  CHECK(ones.series.first_level == 2);
  CHECK(ones.series.unbounded_trend);
  CHECK(ones.levy_sequence.back() == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)).epsilon(0.02));
  CHECK(check_conditions(convergents(parse_quotients("2:repeat", 20))).bounded_type);
}

TEST_CASE("Gauss predictions and small ensembles") {
  CHECK(gauss_prediction(1) == doctest::Approx(std::log(4.0 / 3.0) / std::log(2.0)));
  CHECK(gauss_prediction(1) == doctest::Approx(0.41504).epsilon(1e-4));
  CHECK(gauss_prediction(2) == doctest::Approx(0.16993).epsilon(1e-4));
  const auto g = gauss_digit_stats(200, 30, 7);
  double total = 0;
  for (const auto& r : g.rows) total += r.frequency;
  CHECK(total <= 1.0 + 1e-12);
  CHECK(g.total_digits == 200 * 30);
  const auto again = gauss_digit_stats(200, 30, 7);
  CHECK(again.rows[0].count == g.rows[0].count);
  const auto l = levy_estimate(100, 40, 5);
  CHECK(l.mean == doctest::Approx(kLevyConstant).epsilon(0.1));
}
