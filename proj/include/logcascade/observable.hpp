#pragma once

// Circle functions with one logarithmic singularity:
//   phi(x) = -cL log{x0 - x} - cR log{x - x0} + g(x),
// g a trigonometric polynomial plus a constant.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"
#include "logcascade/fixed.hpp"

namespace logcascade {

struct TrigTerm {
  int freq = 1;  // >= 1
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

enum class Shape { Smooth, OneSided, Symmetric, Asymmetric };

const char* to_string(Shape shape);

// Limits of phi''(x) (x - x0)^2 from the left and right.
struct LiteralLimits {
  double left = 0.0;   // A
  double right = 0.0;  // B
  bool sum_nonzero = false;
};

class SingularObservable {
 public:
  SingularObservable() = default;
  // Validates coefficients and frequencies. With mean_zero set, the constant
  // must cancel cL + cR to 1e-12.
  SingularObservable(Fixed x0, double cL, double cR, std::vector<TrigTerm> trig, double constant,
                     bool mean_zero);

  const Fixed& x0() const noexcept { return x0_; }
  double cL() const noexcept { return cL_; }
  double cR() const noexcept { return cR_; }
  const std::vector<TrigTerm>& trig() const noexcept { return trig_; }
  double constant() const noexcept { return constant_; }
  bool mean_zero() const noexcept { return mean_zero_; }

  Shape shape() const noexcept;
  bool has_singularity() const noexcept { return cL_ != 0.0 || cR_ != 0.0; }
  // Exact mean: the two log integrals are 1 each, trig terms have mean 0.
  double mean() const noexcept { return cL_ + cR_ + constant_; }
  LiteralLimits literal_limits() const noexcept { return {cL_, cR_, cL_ + cR_ != 0.0}; }

  // Offset form: y = {x - x0}; dR = y, dL = 1 - y as doubles.
  double value_at(double dL, double dR, double x) const noexcept;
  double derivative_at(double dL, double dR, double x) const noexcept;
  double smooth(double x) const noexcept;
  double smooth_derivative(double x) const noexcept;

  // True when y = {x - x0} is within 2^-128 of the singularity on a side
  // carrying a nonzero coefficient (or y == 0).
  bool guarded(const Fixed& y) const noexcept;

  // Throws SingularityHit(-1) inside the guard radius.
  double operator()(const Fixed& x) const;
  double derivative(const Fixed& x) const;
  double operator()(double x) const { return (*this)(Fixed::from_double(x - std::floor(x))); }
  double derivative(double x) const { return derivative(Fixed::from_double(x - std::floor(x))); }

 private:
  Fixed x0_;
  double cL_ = 0.0;
  double cR_ = 0.0;
  std::vector<TrigTerm> trig_;
  double constant_ = 0.0;
  bool mean_zero_ = false;
};

SingularObservable make_one_sided_phi();
SingularObservable make_symmetric_phi();
SingularObservable make_constant(double c);

struct Decomposition {
  SingularObservable tilde;  // one-sided excess (smooth when degenerate)
  SingularObservable sym;    // -D log{x - x0} - D log{x0 - x} - 2D
  double D = 0.0;
  bool degenerate = false;   // cL == cR: tilde has no singularity
};

Decomposition decompose_asymmetric(const SingularObservable& phi1);

struct ClosedForms {
  // Variation over one period read as a function on [0, 1) starting at x0;
  // the *_circle variants add the jump across x0 itself.
  double variation = 0.0;
  double variation_circle = 0.0;
  double integral = 0.0;
  double stated_integral = 0.0;  // -log q / (50 q), the approximate form
  double derivative_variation = 0.0;
  double derivative_variation_circle = 0.0;
  double derivative_integral = 0.0;
};

// phi zeroed on the 1/(50 q) window on the singular side of x0.
class TruncatedObservable {
 public:
  TruncatedObservable(SingularObservable base, const mpz_class& q);

  const SingularObservable& base() const noexcept { return base_; }
  const mpz_class& q() const noexcept { return q_; }
  bool mirrored() const noexcept { return mirrored_; }
  // Width 1/(50 q) of the cut, rounded to nearest in fixed point.
  const Fixed& cut_width() const noexcept { return cut_; }
  double cut_width_double() const noexcept { return cut_d_; }
  // Present when the smooth part is a constant.
  const std::optional<ClosedForms>& closed_forms() const noexcept { return closed_; }

  // y = {x - x0}.
  bool in_cut(const Fixed& y) const noexcept;
  double operator()(const Fixed& x) const;
  double derivative(const Fixed& x) const;

 private:
  SingularObservable base_;
  mpz_class q_;
  bool mirrored_ = false;
  Fixed cut_;
  double cut_d_ = 0.0;
  std::optional<ClosedForms> closed_;
};

// Requires a one-sided observable; two-sided shapes go through
// decompose_asymmetric first.
TruncatedObservable truncate(const SingularObservable& phi, const mpz_class& q);

// f_eta = sym * indicator of [x0 + eta/q, x0 + 1 - eta/q] and its derivative.
struct SymmetricCut {
  double D = 0.0;
  double eta = 0.0;
  mpz_class q;
  Fixed lower;  // eta / q
  double lower_d = 0.0;
  double derivative_variation() const;
  double stated_bound() const;  // 2 q / eta (per unit D)
  bool kept(const Fixed& y) const noexcept;
  double derivative(const Fixed& y) const;
};

SymmetricCut symmetric_cut(double D, double eta, const mpz_class& q);

nlohmann::json to_json(const SingularObservable& phi);
SingularObservable observable_from_json(const nlohmann::json& j, const std::string& path = "/observable");
nlohmann::json to_json(const ClosedForms& c);

}  // namespace logcascade
