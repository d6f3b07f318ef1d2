#pragma once

// Birkhoff sums of singular observables along rotation orbits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logcascade/contfrac.hpp"
#include "logcascade/fixed.hpp"
#include "logcascade/kernels.hpp"
#include "logcascade/observable.hpp"

namespace logcascade {

using OrbitPoint = Fixed;
using kernel::Exec;

struct SumResult {
  double value = 0.0;
  double error_bound = 0.0;
  std::uint64_t excluded = 0;  // orbit points inside the singular-side cut window
  std::uint64_t terms = 0;
  double max_abs_term = 0.0;
};

SumResult to_result(const kernel::Accumulator& acc, std::uint64_t excluded);

inline constexpr std::int64_t kMaxCocycleSteps = std::int64_t{1} << 62;

// phi^(n)(x): sum_{i<n} phi(x + i alpha) for n > 0, 0 for n = 0 and
// -sum_{1<=i<=-n} phi(x - i alpha) for n < 0.
SumResult cocycle_sum(const SingularObservable& phi, const contfrac::ConvergentTable& table, const OrbitPoint& x,
                      std::int64_t n, Exec exec = Exec::Parallel);

// phi^(q_n)(x). `excluded` counts orbit points in the 1/(50 q_n) cut window
// on each singular side; zero means the sum equals the truncated sum.
SumResult rigid_sum(const SingularObservable& phi, const contfrac::ConvergentTable& table, const OrbitPoint& x,
                    std::size_t level, Exec exec = Exec::Parallel);

// Truncated sum: points in the cut contribute 0 (counted in `excluded`).
SumResult truncated_sum(const TruncatedObservable& phibar, const contfrac::ConvergentTable& table,
                        const OrbitPoint& x, std::size_t level, Exec exec = Exec::Parallel);

// sum_{l < q} phibar(x + l/q), q = phibar.q(). Points are placed at the
// nearest fixed-point multiple of 1/q, so positions carry error below q 2^-257.
SumResult rational_sum(const TruncatedObservable& phibar, const OrbitPoint& x, Exec exec = Exec::Parallel);

SumResult derivative_sum(const SingularObservable& phi, const contfrac::ConvergentTable& table,
                         const OrbitPoint& x, std::size_t level, Exec exec = Exec::Parallel);

struct ValueDerivative {
  SumResult value;
  SumResult derivative;
};

// Both sums in one orbit pass.
ValueDerivative rigid_sum_with_derivative(const SingularObservable& phi, const contfrac::ConvergentTable& table,
                                          const OrbitPoint& x, std::size_t level, Exec exec = Exec::Parallel);

// Batched rigid sums (value and derivative) at many points; parallel over points.
std::vector<ValueDerivative> rigid_batch(const SingularObservable& phi, const contfrac::ConvergentTable& table,
                                         const std::vector<OrbitPoint>& xs, std::size_t level, bool derivative,
                                         Exec exec = Exec::Parallel);

ValueDerivative rational_sum_with_derivative(const TruncatedObservable& phibar, const OrbitPoint& x,
                                            Exec exec = Exec::Parallel);

// Batched rational sums.
std::vector<SumResult> rational_batch(const TruncatedObservable& phibar, const std::vector<OrbitPoint>& xs,
                                      Exec exec = Exec::Parallel);

struct DKObservable {
  enum class Kind { Sawtooth, Trig, TruncatedDerivative, SymmetricDerivative };
  Kind kind = Kind::Sawtooth;
  std::vector<TrigTerm> trig;                  // Trig
  std::optional<SingularObservable> base;      // TruncatedDerivative: one-sided phi
  double D = 1.0;                              // SymmetricDerivative
  double eta = 0.5;

  static DKObservable sawtooth() { return {}; }
  static DKObservable trig_poly(std::vector<TrigTerm> t);
  static DKObservable truncated_derivative(SingularObservable phi);
  static DKObservable symmetric_derivative(double D, double eta);
};

const char* to_string(DKObservable::Kind kind);

struct DKReport {
  std::string kind;
  std::size_t level = 0;
  double q = 0.0;
  std::size_t samples = 0;
  double integral = 0.0;        // int f
  double max_deviation = 0.0;   // max |f^(q)(x) - q int f|
  double variation = 0.0;       // Var f on the circle (the inequality's bound)
  double stated_bound = 0.0;    // bound as stated for this shape (equals variation unless noted)
  double error_budget = 0.0;    // largest summation error bound across samples
  std::uint64_t excluded = 0;
  bool pass = false;            // max_deviation <= stated_bound + error_budget
};

DKReport denjoy_koksma_check(const DKObservable& f, const contfrac::ConvergentTable& table, std::size_t level,
                             std::size_t samples, std::uint64_t seed, Exec exec = Exec::Parallel);

// Variation of a trigonometric polynomial, by dense quadrature of |f'|.
double trig_variation(const std::vector<TrigTerm>& terms);

}  // namespace logcascade
