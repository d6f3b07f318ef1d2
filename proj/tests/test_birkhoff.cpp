#include "doctest.h"

#include <cmath>

#include <mpfr.h>

#include "logcascade/birkhoff.hpp"
#include "logcascade/error.hpp"
#include "logcascade/rng.hpp"

using namespace logcascade;
using contfrac::convergents;
using contfrac::parse_quotients;

namespace {

const contfrac::ConvergentTable& alpha_star() {
  static const auto t = convergents(parse_quotients("1,100:repeat", 8));
  return t;
}

// phi^(n)(x) for the one-sided observable with alpha = sqrt(2600) - 50 computed
// in MPFR at 400 bits; x given as an exact rational.
double mpfr_one_sided_sum(const mpq_class& x, long n) {
  mpfr_t alpha, pos, term, sum, one;
  mpfr_inits2(400, alpha, pos, term, sum, one, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_ui(alpha, 2600, MPFR_RNDN);
  mpfr_sqrt(alpha, alpha, MPFR_RNDN);
  mpfr_sub_ui(alpha, alpha, 50, MPFR_RNDN);
  mpfr_set_q(pos, x.get_mpq_t(), MPFR_RNDN);
  mpfr_set_ui(sum, 0, MPFR_RNDN);
  for (long i = 0; i < n; ++i) {
    // -1 - log(1 - {pos})
    mpfr_frac(term, pos, MPFR_RNDN);
    mpfr_ui_sub(term, 1, term, MPFR_RNDN);
    mpfr_log(term, term, MPFR_RNDN);
    mpfr_add(sum, sum, term, MPFR_RNDN);
    mpfr_add_ui(sum, sum, 1, MPFR_RNDN);
    mpfr_add(pos, pos, alpha, MPFR_RNDN);
  }
  const double out = -mpfr_get_d(sum, MPFR_RNDN);
  mpfr_clears(alpha, pos, term, sum, one, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace

TEST_CASE("cocycle branches") {
  const auto& t = alpha_star();
  const auto phi = make_one_sided_phi();
  const Fixed x = parse_position("0.3");
  CHECK(cocycle_sum(phi, t, x, 0).value == 0.0);
  CHECK(cocycle_sum(phi, t, x, 0).terms == 0);
  const Fixed back = circle_sub(x, t.alpha().times(7).frac());
  CHECK(cocycle_sum(phi, t, x, -7).value == doctest::Approx(-cocycle_sum(phi, t, back, 7).value).epsilon(1e-14));
  CHECK_THROWS_AS(cocycle_sum(phi, t, x, (std::int64_t{1} << 62) + 1), Error);
}

TEST_CASE("rigid sum against an MPFR summation oracle") {
  const auto& t = alpha_star();
  const auto phi = make_one_sided_phi();
  for (const char* pos : {"0.3", "0.77", "1/7"}) {
    const Fixed x = parse_position(pos);
    for (std::size_t level : {1, 2, 3, 4}) {
      const long q = static_cast<long>(t.q_small(level));
      const SumResult r = rigid_sum(phi, t, x, level);
      CHECK(r.terms == static_cast<std::uint64_t>(q));
      CHECK(r.value == doctest::Approx(mpfr_one_sided_sum(x.to_mpq(), q)).epsilon(1e-9));
    }
  }
  const SumResult c = cocycle_sum(make_one_sided_phi(), t, parse_position("0.3"), 102);
  CHECK(std::abs(c.value - mpfr_one_sided_sum(parse_position("0.3").to_mpq(), 102)) < 1e-9);
  CHECK_THROWS_AS(rigid_sum(phi, t, parse_position("0.3"), 0), Error);
}

TEST_CASE("cocycle identity") {
  const auto& t = alpha_star();
  const SingularObservable f(parse_position("0.41"), 2.0, 1.0, {{1, 0.3, -0.2}}, -3.0, true);
  Stream s(7, "test:cocycle");
  for (int trial = 0; trial < 60; ++trial) {
    const Fixed x = s.circle_point();
    const auto m = static_cast<std::int64_t>(s.below(2001)) - 1000;
    const auto n = static_cast<std::int64_t>(s.below(2001)) - 1000;
    const Fixed tm = m >= 0 ? circle_add(x, t.alpha().times(static_cast<std::uint64_t>(m)).frac())
                            : circle_sub(x, t.alpha().times(static_cast<std::uint64_t>(-m)).frac());
    const SumResult whole = cocycle_sum(f, t, x, m + n);
    const SumResult a = cocycle_sum(f, t, x, m);
    const SumResult b = cocycle_sum(f, t, tm, n);
    // Overlapping ranges cancel; the budget of each side covers its terms.
    const double budget = 2 * (whole.error_bound + a.error_bound + b.error_bound) + 1e-12;
    CHECK(std::abs(whole.value - (a.value + b.value)) <= budget);
  }
}

TEST_CASE("orbit exactness at convergent times") {
  const auto& t = alpha_star();
  Stream s(8, "test:orbit");
  const Fixed x = s.circle_point();
  for (std::size_t n = 1; n <= 7; ++n) {
    const std::uint64_t q = t.q_small(n);
    Limbs y = x.frac_limbs();
    for (std::uint64_t i = 0; i < q; ++i) limbs::add(y, t.alpha().frac_limbs());
    const Fixed moved(y);
    // |q alpha - p| computed from the big-integer convergents of a deep row.
    const auto& deep = t.row(t.size() - 1);
    mpq_class disp = mpq_class(deep.p, deep.q) * mpq_class(t.q(n)) - mpq_class(t.p(n));
    disp.canonicalize();
    const double gap = circle_signed_gap(moved, x);
    CHECK(gap == doctest::Approx(disp.get_d()).epsilon(1e-12));
    mpq_class actual = mpq_class(moved.to_mpq() - x.to_mpq());
    if (actual > mpq_class(1, 2)) actual -= 1;
    if (actual < mpq_class(-1, 2)) actual += 1;
    mpq_class err = abs(actual - disp);
    mpz_class two190 = 1;
    mpz_mul_2exp(two190.get_mpz_t(), two190.get_mpz_t(), 190);
    CHECK(err * mpq_class(two190) < 1);
    CHECK(abs(disp) < mpq_class(1) / mpq_class(t.q(n)));
    CHECK(t.displacement_sign(n) == (n % 2 == 1 ? -1 : 1));
  }
}

TEST_CASE("derivative sum matches a centred difference") {
  const auto& t = alpha_star();
  const auto phi = make_one_sided_phi();
  for (std::size_t level : {3, 5}) {
    const double q = static_cast<double>(t.q_small(level));
    const double h = 1e-3 / q;
    const Fixed x = Fixed::from_double(17.4 / q);
    const double up = rigid_sum(phi, t, Fixed::from_double(17.4 / q + h), level).value;
    const double down = rigid_sum(phi, t, Fixed::from_double(17.4 / q - h), level).value;
    const double d = derivative_sum(phi, t, x, level).value;
    CHECK(std::abs((up - down) / (2 * h) - d) / std::abs(d) < 1e-4);
    const auto both = rigid_sum_with_derivative(phi, t, x, level);
    CHECK(both.derivative.value == d);
  }
  CHECK(derivative_sum(make_constant(2.0), t, parse_position("0.3"), 5).value == 0.0);
}

TEST_CASE("chunked parallel sums equal the serial path bit for bit") {
  const auto& t = alpha_star();
  const auto phi = make_symmetric_phi();
  const Fixed x = parse_position("0.123");
  const std::int64_t n = 3 * (std::int64_t{1} << 20) + 12345;
  const SumResult par = cocycle_sum(phi, t, x, n, Exec::Parallel);
  const SumResult ser = cocycle_sum(phi, t, x, n, Exec::Serial);
  CHECK(par.value == ser.value);
  CHECK(par.error_bound == ser.error_bound);
  kernel::PointEval e;
  e.phi = &phi;
  const auto ref = kernel::reference_sum(e, circle_sub(x, phi.x0()), t.alpha(), static_cast<std::uint64_t>(n));
  CHECK(std::abs(ref.value.value() - par.value) <= par.error_bound + ref.value.error_bound());
  CHECK(par.error_bound <= static_cast<double>(par.terms) * 0x1p-50 * par.max_abs_term);
}

TEST_CASE("rational sum periodicity and guard") {
  const auto& t = alpha_star();
  const auto bar = truncate(make_one_sided_phi(), t.q(3));
  const Fixed x = parse_position("0.3");
  const Fixed shifted = circle_add(x, Fixed::from_ratio(mpz_class(1), t.q(3)));
  CHECK(rational_sum(bar, x).value == doctest::Approx(rational_sum(bar, shifted).value).epsilon(1e-13));

  // For x in a cell interior no rigid orbit point enters the cut window.
  const double q = static_cast<double>(t.q_small(3));
  for (int l : {0, 5, 50, 101}) {
    const Fixed inside = Fixed::from_double((l + 0.3) / q);
    const SumResult r = rigid_sum(make_one_sided_phi(), t, inside, 3);
    CHECK(r.excluded == 0);
    CHECK(truncated_sum(bar, t, inside, 3).value == r.value);
  }
}

TEST_CASE("rational rotation makes the two sums coincide") {
  // alpha replaced by p_3/q_3 exactly.
  const auto t = convergents(parse_quotients("1,100,1", 0));
  const auto bar = truncate(make_one_sided_phi(), t.q(3));
  const Fixed x = Fixed::from_double(0.4 / 102);
  const double rigid = truncated_sum(bar, t, x, 3).value;
  const double rational = rational_sum(bar, x).value;
  CHECK(rigid == doctest::Approx(rational).epsilon(1e-13));
}

TEST_CASE("Denjoy-Koksma checks") {
  const auto golden = convergents(parse_quotients("1:repeat", 24));
  REQUIRE(golden.q_small(20) == 10946);
  const auto saw = denjoy_koksma_check(DKObservable::sawtooth(), golden, 20, 200, 3);
  CHECK(saw.pass);
  CHECK(saw.max_deviation <= 2.0);

  const auto trig = denjoy_koksma_check(DKObservable::trig_poly({{1, 1.0, 0.0}, {2, 0.0, 0.5}}), golden, 12, 100, 3);
  CHECK(trig.variation > 0);
  CHECK(trig.pass);

  const auto& t = alpha_star();
  const auto dk = denjoy_koksma_check(DKObservable::truncated_derivative(make_one_sided_phi()), t, 3, 100, 3);
  CHECK(dk.stated_bound == 100 * 102 - 1);
  CHECK(dk.pass);
}
