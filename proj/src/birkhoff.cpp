#include "logcascade/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "logcascade/error.hpp"
#include "logcascade/rng.hpp"

namespace logcascade {

using contfrac::ConvergentTable;
using kernel::OrbitSum;
using kernel::PointEval;

SumResult to_result(const kernel::Accumulator& acc, std::uint64_t excluded) {
  SumResult r;
  r.value = acc.value();
  r.error_bound = acc.error_bound();
  r.excluded = excluded;
  r.terms = acc.terms;
  r.max_abs_term = acc.max_abs;
  return r;
}

namespace {

std::uint64_t level_q(const ConvergentTable& table, std::size_t level) {
  if (level == 0) throw Error(ErrorKind::PreconditionViolation, "level must be >= 1");
  if (level >= table.size()) {
    throw Error(ErrorKind::PreconditionViolation,
                "level " + std::to_string(level) + " beyond table rows " + std::to_string(table.size() - 1));
  }
  return table.q_small(level);
}

PointEval rigid_eval(const SingularObservable& phi, std::uint64_t q) {
  PointEval e;
  e.phi = &phi;
  e.x0 = phi.x0().to_double();
  e.cut = PointEval::Cut::Count;
  e.cut_width = Fixed::from_ratio(mpz_class(1), mpz_class(static_cast<unsigned long>(q)) * 50).frac_limbs();
  e.cut_left = phi.cL() != 0.0;
  e.cut_right = phi.cR() != 0.0;
  return e;
}

PointEval truncated_eval(const TruncatedObservable& phibar) {
  PointEval e;
  e.phi = &phibar.base();
  e.x0 = phibar.base().x0().to_double();
  e.cut = PointEval::Cut::Zero;
  e.cut_width = phibar.cut_width().frac_limbs();
  e.cut_left = !phibar.mirrored();
  e.cut_right = phibar.mirrored();
  return e;
}

}  // namespace

SumResult cocycle_sum(const SingularObservable& phi, const ConvergentTable& table, const OrbitPoint& x,
                      std::int64_t n, Exec exec) {
  if (n == 0) return {};
  if (n > kMaxCocycleSteps || n < -kMaxCocycleSteps) {
    throw Error(ErrorKind::OverflowGuard, "|n| exceeds 2^62");
  }
  PointEval e;
  e.phi = &phi;
  e.x0 = phi.x0().to_double();
  const Fixed y = circle_sub(x, phi.x0());
  if (n > 0) {
    const OrbitSum s = kernel::orbit_sum(e, y, table.alpha(), static_cast<std::uint64_t>(n), exec);
    return to_result(s.value, 0);
  }
  const Fixed back = circle_neg(table.alpha());
  const OrbitSum s =
      kernel::orbit_sum(e, circle_add(y, back), back, static_cast<std::uint64_t>(-n), exec, -1, -1);
  SumResult r = to_result(s.value, 0);
  r.value = -r.value;
  return r;
}

SumResult rigid_sum(const SingularObservable& phi, const ConvergentTable& table, const OrbitPoint& x,
                    std::size_t level, Exec exec) {
  const std::uint64_t q = level_q(table, level);
  const PointEval e = rigid_eval(phi, q);
  const OrbitSum s = kernel::orbit_sum(e, circle_sub(x, phi.x0()), table.alpha(), q, exec);
  return to_result(s.value, s.excluded);
}

SumResult truncated_sum(const TruncatedObservable& phibar, const ConvergentTable& table, const OrbitPoint& x,
                        std::size_t level, Exec exec) {
  const std::uint64_t q = level_q(table, level);
  if (phibar.q() != static_cast<unsigned long>(q)) {
    throw Error(ErrorKind::PreconditionViolation, "truncation level does not match q_n");
  }
  const PointEval e = truncated_eval(phibar);
  const OrbitSum s = kernel::orbit_sum(e, circle_sub(x, phibar.base().x0()), table.alpha(), q, exec);
  return to_result(s.value, s.excluded);
}

SumResult rational_sum(const TruncatedObservable& phibar, const OrbitPoint& x, Exec exec) {
  if (!phibar.q().fits_ulong_p()) throw Error(ErrorKind::OverflowGuard, "q exceeds 64 bits");
  const std::uint64_t q = phibar.q().get_ui();
  const PointEval e = truncated_eval(phibar);
  const Fixed step = Fixed::from_ratio(mpz_class(1), phibar.q());
  const OrbitSum s = kernel::orbit_sum(e, circle_sub(x, phibar.base().x0()), step, q, exec);
  return to_result(s.value, s.excluded);
}

ValueDerivative rational_sum_with_derivative(const TruncatedObservable& phibar, const OrbitPoint& x, Exec exec) {
  if (!phibar.q().fits_ulong_p()) throw Error(ErrorKind::OverflowGuard, "q exceeds 64 bits");
  PointEval e = truncated_eval(phibar);
  e.want_derivative = true;
  const Fixed step = Fixed::from_ratio(mpz_class(1), phibar.q());
  const OrbitSum s = kernel::orbit_sum(e, circle_sub(x, phibar.base().x0()), step, phibar.q().get_ui(), exec);
  return {to_result(s.value, s.excluded), to_result(s.deriv, s.excluded)};
}

SumResult derivative_sum(const SingularObservable& phi, const ConvergentTable& table, const OrbitPoint& x,
                         std::size_t level, Exec exec) {
  const std::uint64_t q = level_q(table, level);
  PointEval e = rigid_eval(phi, q);
  e.want_value = false;
  e.want_derivative = true;
  const OrbitSum s = kernel::orbit_sum(e, circle_sub(x, phi.x0()), table.alpha(), q, exec);
  return to_result(s.deriv, s.excluded);
}

ValueDerivative rigid_sum_with_derivative(const SingularObservable& phi, const ConvergentTable& table,
                                          const OrbitPoint& x, std::size_t level, Exec exec) {
  const std::uint64_t q = level_q(table, level);
  PointEval e = rigid_eval(phi, q);
  e.want_derivative = true;
  const OrbitSum s = kernel::orbit_sum(e, circle_sub(x, phi.x0()), table.alpha(), q, exec);
  return {to_result(s.value, s.excluded), to_result(s.deriv, s.excluded)};
}

std::vector<ValueDerivative> rigid_batch(const SingularObservable& phi, const ConvergentTable& table,
                                         const std::vector<OrbitPoint>& xs, std::size_t level, bool derivative,
                                         Exec exec) {
  const std::uint64_t q = level_q(table, level);
  PointEval e = rigid_eval(phi, q);
  e.want_derivative = derivative;
  std::vector<Fixed> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) ys.push_back(circle_sub(x, phi.x0()));
  const auto sums = kernel::batch_sums(e, ys, table.alpha(), q, exec);
  std::vector<ValueDerivative> out;
  out.reserve(sums.size());
  for (const auto& s : sums) out.push_back({to_result(s.value, s.excluded), to_result(s.deriv, s.excluded)});
  return out;
}

std::vector<SumResult> rational_batch(const TruncatedObservable& phibar, const std::vector<OrbitPoint>& xs,
                                      Exec exec) {
  if (!phibar.q().fits_ulong_p()) throw Error(ErrorKind::OverflowGuard, "q exceeds 64 bits");
  const PointEval e = truncated_eval(phibar);
  const Fixed step = Fixed::from_ratio(mpz_class(1), phibar.q());
  std::vector<Fixed> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) ys.push_back(circle_sub(x, phibar.base().x0()));
  const auto sums = kernel::batch_sums(e, ys, step, phibar.q().get_ui(), exec);
  std::vector<SumResult> out;
  out.reserve(sums.size());
  for (const auto& s : sums) out.push_back(to_result(s.value, s.excluded));
  return out;
}

DKObservable DKObservable::trig_poly(std::vector<TrigTerm> t) {
  DKObservable f;
  f.kind = Kind::Trig;
  f.trig = std::move(t);
  return f;
}

DKObservable DKObservable::truncated_derivative(SingularObservable phi) {
  DKObservable f;
  f.kind = Kind::TruncatedDerivative;
  f.base = std::move(phi);
  return f;
}

DKObservable DKObservable::symmetric_derivative(double D, double eta) {
  DKObservable f;
  f.kind = Kind::SymmetricDerivative;
  f.D = D;
  f.eta = eta;
  return f;
}

const char* to_string(DKObservable::Kind kind) {
  switch (kind) {
    case DKObservable::Kind::Sawtooth: return "sawtooth";
    case DKObservable::Kind::Trig: return "trig";
    case DKObservable::Kind::TruncatedDerivative: return "truncated_derivative";
    case DKObservable::Kind::SymmetricDerivative: return "symmetric_derivative";
  }
  return "unknown";
}

double trig_variation(const std::vector<TrigTerm>& terms) {
  constexpr int kPoints = 1 << 16;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  kernel::Accumulator acc;
  for (int i = 0; i < kPoints; ++i) {
    const double x = (i + 0.5) / kPoints;
    double d = 0.0;
    for (const auto& t : terms) {
      const double arg = kTwoPi * t.freq * x;
      d += kTwoPi * t.freq * (t.sin_coeff * std::cos(arg) - t.cos_coeff * std::sin(arg));
    }
    acc.add(std::abs(d));
  }
  return acc.value() / kPoints;
}

DKReport denjoy_koksma_check(const DKObservable& f, const ConvergentTable& table, std::size_t level,
                             std::size_t samples, std::uint64_t seed, Exec exec) {
  const std::uint64_t q = level_q(table, level);
  const mpz_class qz = static_cast<unsigned long>(q);
  DKReport rep;
  rep.kind = to_string(f.kind);
  rep.level = level;
  rep.q = static_cast<double>(q);
  rep.samples = samples;

  Stream stream(seed, "birkhoff:dk", level);
  std::vector<Fixed> xs(samples);
  for (auto& x : xs) x = stream.circle_point();

  std::vector<OrbitSum> sums;
  bool use_deriv = false;
  std::optional<TruncatedObservable> phibar;
  std::optional<SymmetricCut> cut;
  switch (f.kind) {
    case DKObservable::Kind::Sawtooth:
      rep.integral = 0.0;
      rep.variation = 2.0;
      rep.stated_bound = 2.0;
      sums = kernel::batch_sums(kernel::SawtoothEval{}, xs, table.alpha(), q, exec);
      break;
    case DKObservable::Kind::Trig: {
      rep.integral = 0.0;
      rep.variation = trig_variation(f.trig);
      rep.stated_bound = rep.variation;
      kernel::TrigEval e{&f.trig};
      sums = kernel::batch_sums(e, xs, table.alpha(), q, exec);
      break;
    }
    case DKObservable::Kind::TruncatedDerivative: {
      if (!f.base) throw Error(ErrorKind::PreconditionViolation, "truncated derivative needs a base observable");
      phibar.emplace(*f.base, qz);
      if (!phibar->closed_forms()) {
        throw Error(ErrorKind::UnsupportedShape, "derivative variation needs a constant smooth part");
      }
      const auto& cf = *phibar->closed_forms();
      rep.integral = cf.derivative_integral;
      rep.variation = cf.derivative_variation_circle;
      rep.stated_bound = cf.derivative_variation;
      PointEval e = truncated_eval(*phibar);
      e.want_value = false;
      e.want_derivative = true;
      for (auto& x : xs) x = circle_sub(x, f.base->x0());
      sums = kernel::batch_sums(e, xs, table.alpha(), q, exec);
      use_deriv = true;
      break;
    }
    case DKObservable::Kind::SymmetricDerivative: {
      cut = symmetric_cut(f.D, f.eta, qz);
      rep.integral = 0.0;
      rep.variation = cut->derivative_variation();
      rep.stated_bound = cut->stated_bound();
      PointEval e;
      e.sym = &*cut;
      sums = kernel::batch_sums(e, xs, table.alpha(), q, exec);
      use_deriv = true;
      break;
    }
  }
  const double centre = rep.q * rep.integral;
  for (const auto& s : sums) {
    const auto& acc = use_deriv ? s.deriv : s.value;
    rep.max_deviation = std::max(rep.max_deviation, std::abs(acc.value() - centre));
    rep.error_budget = std::max(rep.error_budget, acc.error_bound());
    rep.excluded += s.excluded;
  }
  rep.pass = rep.max_deviation <= rep.stated_bound + rep.error_budget;
  return rep;
}

}  // namespace logcascade
