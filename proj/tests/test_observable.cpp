#include "doctest.h"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "logcascade/contfrac.hpp"
#include "logcascade/error.hpp"
#include "logcascade/observable.hpp"
#include "logcascade/rng.hpp"

using namespace logcascade;

namespace {

double quad(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b);
}

// Integral of phi over one period in the offset u = {x - x0}; the two-argument
// form hands over the exact distance to the nearer endpoint.
double period_integral(const SingularObservable& f) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double x0 = f.x0().to_double();
  auto g = [&](double u, double uc) {
    const double dR = u <= 0.5 ? u : 1 - uc;
    const double dL = u <= 0.5 ? 1 - u : uc;
    return f.value_at(dL, dR, std::fmod(x0 + u, 1.0));
  };
  return integrator.integrate(g, 0.0, 1.0);
}

}  // namespace

TEST_CASE("one-sided and symmetric observables") {
  const auto phi = make_one_sided_phi();
  CHECK(phi(0.5) == doctest::Approx(-1 - std::log(0.5)).epsilon(1e-15));
  CHECK(phi(0.5) == doctest::Approx(-0.306853).epsilon(1e-6));
  CHECK(phi.derivative(0.5) == doctest::Approx(2.0));
  CHECK(phi(0.9) == doctest::Approx(-1 - std::log(0.1)).epsilon(1e-14));
  CHECK(phi.shape() == Shape::OneSided);
  CHECK(phi.mean() == 0.0);

  const auto sym = make_symmetric_phi();
  CHECK(sym(0.5) == doctest::Approx(-0.613706).epsilon(1e-6));
  CHECK(sym.shape() == Shape::Symmetric);
  CHECK(sym.mean() == 0.0);

  CHECK_THROWS_AS(phi(Fixed{}), SingularityHit);
  Limbs tiny{1, 0, 0, 0};
  CHECK_THROWS_AS(phi(circle_neg(Fixed(tiny))), SingularityHit);
  // The regular side of a one-sided observable has no guard.
  CHECK(phi(Fixed(tiny)) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(sym(Fixed(tiny)), SingularityHit);
}

TEST_CASE("mean zero observables integrate to zero by split quadrature") {
  const auto phi = make_one_sided_phi();
  const auto sym = make_symmetric_phi();
  const SingularObservable shifted(parse_position("0.3"), 2.0, 1.0, {{1, 0.4, -0.2}, {3, 0.1, 0.05}}, -3.0, true);
  for (const auto* f : {&phi, &sym, &shifted}) CHECK(std::abs(period_integral(*f)) < 1e-12);
}

TEST_CASE("mean zero validation") {
  CHECK_THROWS_AS(SingularObservable(Fixed{}, 1.0, 0.0, {}, -0.5, true), Error);
  CHECK_THROWS_AS(SingularObservable(Fixed{}, -1.0, 0.0, {}, 1.0, false), Error);
  CHECK_THROWS_AS(SingularObservable(Fixed{}, 1.0, 0.0, {{0, 1.0, 0.0}}, -1.0, true), Error);
}

TEST_CASE("classification ignores the smooth part") {
  Stream s(5, "test:shape");
  for (int i = 0; i < 50; ++i) {
    const double cL = s.below(3), cR = s.below(3);
    const SingularObservable a(Fixed{}, cL, cR, {}, 0.0, false);
    const SingularObservable b(Fixed{}, cL, cR, {{1 + static_cast<int>(s.below(5)), s.uniform(), s.uniform()}},
                               s.uniform(-3, 3), false);
    CHECK(a.shape() == b.shape());
    CHECK(a.literal_limits().left == b.literal_limits().left);
    CHECK(a.literal_limits().right == b.literal_limits().right);
  }
  const auto lim = make_symmetric_phi().literal_limits();
  CHECK(lim.left == 1.0);
  CHECK(lim.right == 1.0);
  CHECK(lim.sum_nonzero);
}

TEST_CASE("literal limits match phi'' (x - x0)^2 numerically") {
  const SingularObservable f(Fixed{}, 2.0, 1.0, {{2, 0.3, 0.1}}, -3.0, true);
  auto second = [&](double x, double h) { return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h); };
  const double eps = 1e-4;
  CHECK(second(1 - eps, eps / 20) * eps * eps == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(second(eps, eps / 20) * eps * eps == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("asymmetric decomposition") {
  const SingularObservable phi1(parse_position("0.2"), 2.0, 1.0, {{1, 0.5, 0.25}}, -3.0, true);
  const auto d = decompose_asymmetric(phi1);
  CHECK(d.D == 1.0);
  CHECK(d.tilde.cL() == 1.0);
  CHECK(d.tilde.cR() == 0.0);
  CHECK(d.tilde.cL() + d.tilde.cR() == 1.0);
  CHECK(d.sym.shape() == Shape::Symmetric);
  CHECK_FALSE(d.degenerate);
  Stream s(6, "test:decompose");
  for (int i = 0; i < 1000; ++i) {
    const Fixed x = s.circle_point();
    CHECK(std::abs(d.tilde(x) + d.sym(x) - phi1(x)) < 1e-12);
  }
  const auto one = decompose_asymmetric(make_one_sided_phi());
  CHECK(one.D == 0.0);
  CHECK(one.tilde.cL() == 1.0);
  CHECK(decompose_asymmetric(make_symmetric_phi()).degenerate);
}

TEST_CASE("truncation closed forms") {
  const mpz_class q = 10403;
  const auto bar = truncate(make_one_sided_phi(), q);
  REQUIRE(bar.closed_forms());
  const auto& c = *bar.closed_forms();
  const double L = std::log(520150.0);
  CHECK(c.variation == doctest::Approx(2 * L - 1).epsilon(1e-12));
  CHECK(c.variation == doctest::Approx(25.3238).epsilon(1e-5));
  CHECK(c.integral == doctest::Approx(-L / 520150).epsilon(1e-12));
  CHECK(c.integral == doctest::Approx(-2.5304e-5).epsilon(1e-4));
  CHECK(c.derivative_integral == doctest::Approx(L).epsilon(1e-12));
  CHECK(c.derivative_variation == 1040299.0);
  CHECK(c.stated_integral == doctest::Approx(-std::log(10403.0) / 520150).epsilon(1e-12));

  // Independent oracles: quadrature of phi and |phi''| up to the cut plus jumps.
  const double delta = 1.0 / 520150;
  const auto phi = make_one_sided_phi();
  const double integral = quad([](double x) { return -1 - std::log1p(-x); }, 0.0, 1 - delta);
  CHECK(integral == doctest::Approx(c.integral).epsilon(1e-9));
  const double dint = quad([&](double x) { return 1 / (1 - x); }, 0.0, 1 - delta);
  CHECK(dint == doctest::Approx(c.derivative_integral).epsilon(1e-9));
  const double dvar = quad([&](double x) { return 1 / ((1 - x) * (1 - x)); }, 0.0, 1 - delta) + 1 / delta;
  CHECK(dvar == doctest::Approx(c.derivative_variation).epsilon(1e-9));
  const double var = quad([](double x) { return 1 / (1 - x); }, 0.0, 1 - delta) + std::abs(-1 - std::log(delta));
  CHECK(var == doctest::Approx(c.variation).epsilon(1e-9));

  CHECK(bar(parse_position("0.5")) == doctest::Approx(phi(0.5)));
  CHECK(bar(Fixed::from_double(1 - delta / 2)) == 0.0);
  CHECK(bar(Fixed::from_double(1 - 2 * delta)) == doctest::Approx(phi(1 - 2 * delta)));
  CHECK_THROWS_AS(truncate(make_symmetric_phi(), q), Error);
}

TEST_CASE("mirrored truncation") {
  const SingularObservable m(Fixed{}, 0.0, 1.0, {}, -1.0, true);
  const auto bar = truncate(m, 102);
  CHECK(bar.mirrored());
  CHECK(bar.closed_forms()->variation == doctest::Approx(truncate(make_one_sided_phi(), 102).closed_forms()->variation));
  CHECK(bar(Fixed::from_double(1.0 / 10200)) == 0.0);
  CHECK(bar(Fixed::from_double(1 - 1.0 / 10200)) != 0.0);
}

TEST_CASE("symmetric cut variation") {
  const auto cut = symmetric_cut(1.0, 0.5, 10403);
  CHECK(cut.stated_bound() == doctest::Approx(41612.0));
  const double lo = 0.5 / 10403;
  const double var = quad([&](double x) { return 1 / (x * x) + 1 / ((1 - x) * (1 - x)); }, lo, 1 - lo) +
                     2 * std::abs(1 / (1 - lo) - 1 / lo);
  CHECK(cut.derivative_variation() == doctest::Approx(var).epsilon(1e-9));
}

TEST_CASE("observable json round trip") {
  const SingularObservable f(parse_position("1/3"), 2.0, 1.0, {{2, 0.3, 0.1}}, -3.0, true);
  const auto back = observable_from_json(to_json(f));
  CHECK(back.x0() == f.x0());
  CHECK(back.cL() == 2.0);
  CHECK(back.trig().size() == 1);
  CHECK(back.constant() == -3.0);
  CHECK(observable_from_json(nlohmann::json("one_sided")).cL() == 1.0);
  CHECK_THROWS_AS(observable_from_json(nlohmann::json{{"cL", -1.0}}), ConfigError);
  const auto z = observable_from_json(nlohmann::json{{"cL", 1.0}, {"mean_zero", true}});
  CHECK(z.constant() == -1.0);
}
