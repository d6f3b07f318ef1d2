#include "logcascade/observable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "logcascade/contfrac.hpp"
#include "logcascade/error.hpp"

namespace logcascade {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

const char* to_string(Shape shape) {
  switch (shape) {
    case Shape::Smooth: return "smooth";
    case Shape::OneSided: return "one_sided";
    case Shape::Symmetric: return "symmetric";
    case Shape::Asymmetric: return "asymmetric";
  }
  return "unknown";
}

SingularObservable::SingularObservable(Fixed x0, double cL, double cR, std::vector<TrigTerm> trig,
                                       double constant, bool mean_zero)
    : x0_(x0.frac()), cL_(cL), cR_(cR), trig_(std::move(trig)), constant_(constant), mean_zero_(mean_zero) {
  if (!std::isfinite(cL) || !std::isfinite(cR) || cL < 0.0 || cR < 0.0) {
    throw Error(ErrorKind::PreconditionViolation, "log coefficients must be finite and non-negative");
  }
  if (!std::isfinite(constant)) throw Error(ErrorKind::PreconditionViolation, "constant must be finite");
  for (const auto& t : trig_) {
    if (t.freq < 1) throw Error(ErrorKind::PreconditionViolation, "trig frequencies start at 1");
    if (!std::isfinite(t.cos_coeff) || !std::isfinite(t.sin_coeff)) {
      throw Error(ErrorKind::PreconditionViolation, "trig coefficients must be finite");
    }
  }
  if (mean_zero_ && std::abs(mean()) > 1e-12) {
    throw Error(ErrorKind::PreconditionViolation, "mean_zero set but the constant does not cancel cL + cR");
  }
}

Shape SingularObservable::shape() const noexcept {
  if (cL_ == 0.0 && cR_ == 0.0) return Shape::Smooth;
  if (cL_ == 0.0 || cR_ == 0.0) return Shape::OneSided;
  return cL_ == cR_ ? Shape::Symmetric : Shape::Asymmetric;
}

double SingularObservable::smooth(double x) const noexcept {
  double s = constant_;
  for (const auto& t : trig_) {
    const double arg = kTwoPi * t.freq * x;
    s += t.cos_coeff * std::cos(arg) + t.sin_coeff * std::sin(arg);
  }
  return s;
}

double SingularObservable::smooth_derivative(double x) const noexcept {
  double s = 0.0;
  for (const auto& t : trig_) {
    const double arg = kTwoPi * t.freq * x;
    s += kTwoPi * t.freq * (t.sin_coeff * std::cos(arg) - t.cos_coeff * std::sin(arg));
  }
  return s;
}

double SingularObservable::value_at(double dL, double dR, double x) const noexcept {
  double v = trig_.empty() ? constant_ : smooth(x);
  if (cL_ != 0.0) v -= cL_ * std::log(dL);
  if (cR_ != 0.0) v -= cR_ * std::log(dR);
  return v;
}

double SingularObservable::derivative_at(double dL, double dR, double x) const noexcept {
  double v = trig_.empty() ? 0.0 : smooth_derivative(x);
  if (cL_ != 0.0) v += cL_ / dL;
  if (cR_ != 0.0) v -= cR_ / dR;
  return v;
}

bool SingularObservable::guarded(const Fixed& y) const noexcept {
  const auto& l = y.frac_limbs();
  if (limbs::is_zero(l)) return has_singularity();
  if (cR_ != 0.0 && limbs::below_guard(l)) return true;
  if (cL_ != 0.0 && limbs::below_guard(limbs::negate(l))) return true;
  return false;
}

double SingularObservable::operator()(const Fixed& x) const {
  const Fixed y = circle_sub(x, x0_);
  if (guarded(y)) throw SingularityHit(-1);
  const double dR = y.to_double();
  const double dL = limbs::to_double(limbs::negate(y.frac_limbs()));
  return value_at(dL, dR, x.frac().to_double());
}

double SingularObservable::derivative(const Fixed& x) const {
  const Fixed y = circle_sub(x, x0_);
  if (guarded(y)) throw SingularityHit(-1);
  const double dR = y.to_double();
  const double dL = limbs::to_double(limbs::negate(y.frac_limbs()));
  return derivative_at(dL, dR, x.frac().to_double());
}

SingularObservable make_one_sided_phi() { return SingularObservable(Fixed{}, 1.0, 0.0, {}, -1.0, true); }

SingularObservable make_symmetric_phi() { return SingularObservable(Fixed{}, 1.0, 1.0, {}, -2.0, true); }

SingularObservable make_constant(double c) { return SingularObservable(Fixed{}, 0.0, 0.0, {}, c, c == 0.0); }

Decomposition decompose_asymmetric(const SingularObservable& phi1) {
  if (!phi1.has_singularity()) {
    throw Error(ErrorKind::DegenerateInput, "observable has no logarithmic singularity");
  }
  Decomposition out;
  out.D = std::min(phi1.cL(), phi1.cR());
  out.degenerate = phi1.cL() == phi1.cR();
  out.sym = SingularObservable(phi1.x0(), out.D, out.D, {}, -2.0 * out.D, true);
  out.tilde = SingularObservable(phi1.x0(), phi1.cL() - out.D, phi1.cR() - out.D, phi1.trig(),
                                 phi1.constant() + 2.0 * out.D, phi1.mean_zero());
  return out;
}

TruncatedObservable::TruncatedObservable(SingularObservable base, const mpz_class& q)
    : base_(std::move(base)), q_(q) {
  if (base_.shape() != Shape::OneSided) {
    throw Error(ErrorKind::UnsupportedShape,
                std::string("truncation needs a one-sided observable, got ") + to_string(base_.shape()));
  }
  if (q_ < 1) throw Error(ErrorKind::PreconditionViolation, "truncation level needs q >= 1");
  mirrored_ = base_.cL() == 0.0;
  cut_ = Fixed::from_ratio(mpz_class(1), q_ * 50);
  const double L = contfrac::log_mpz(q_ * 50);
  cut_d_ = std::exp(-L);
  if (base_.trig().empty()) {
    const double c = mirrored_ ? base_.cR() : base_.cL();
    const double k = base_.constant();
    const double delta = cut_d_;
    ClosedForms f;
    f.variation = c * L + std::abs(c * L + k);
    f.variation_circle = f.variation + std::abs(k);
    // -delta + delta log delta written to avoid cancellation for small delta
    f.integral = c * (1.0 - delta * (1.0 + L)) + k * (1.0 - delta);
    f.stated_integral = -c * contfrac::log_mpz(q_) / (50.0 * q_.get_d());
    const double top = 50.0 * q_.get_d();
    f.derivative_variation = c * (top - 1.0) + c * top;
    f.derivative_variation_circle = f.derivative_variation + c;
    f.derivative_integral = mirrored_ ? -c * L : c * L;
    closed_ = f;
  }
}

bool TruncatedObservable::in_cut(const Fixed& y) const noexcept {
  // Cut orientation: x in [x0 - w, x0), i.e. {x0 - x} <= w.
  const Limbs& l = y.frac_limbs();
  if (mirrored_) return limbs::less(l, cut_.frac_limbs());
  if (limbs::is_zero(l)) return true;
  return !limbs::less(cut_.frac_limbs(), limbs::negate(l));
}

double TruncatedObservable::operator()(const Fixed& x) const {
  if (in_cut(circle_sub(x, base_.x0()))) return 0.0;
  return base_(x);
}

double TruncatedObservable::derivative(const Fixed& x) const {
  if (in_cut(circle_sub(x, base_.x0()))) return 0.0;
  return base_.derivative(x);
}

TruncatedObservable truncate(const SingularObservable& phi, const mpz_class& q) {
  return TruncatedObservable(phi, q);
}

double SymmetricCut::derivative_variation() const {
  const double qd = q.get_d();
  return 4.0 * D * (qd / eta - qd / (qd - eta));
}

double SymmetricCut::stated_bound() const { return 2.0 * D * q.get_d() / eta; }

bool SymmetricCut::kept(const Fixed& y) const noexcept {
  const Limbs& l = y.frac_limbs();
  return !limbs::less(l, lower.frac_limbs()) && !limbs::less(limbs::negate(l), lower.frac_limbs()) &&
         !limbs::is_zero(l);
}

double SymmetricCut::derivative(const Fixed& y) const {
  if (!kept(y)) return 0.0;
  const double dR = y.to_double();
  const double dL = limbs::to_double(limbs::negate(y.frac_limbs()));
  return D / dL - D / dR;
}

SymmetricCut symmetric_cut(double D, double eta, const mpz_class& q) {
  if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorKind::PreconditionViolation, "eta must lie in (0,1)");
  if (q < 1) throw Error(ErrorKind::PreconditionViolation, "q must be positive");
  SymmetricCut c;
  c.D = D;
  c.eta = eta;
  c.q = q;
  const mpq_class lo = mpq_class(eta) / mpq_class(q);
  c.lower = Fixed::from_ratio(lo);
  c.lower_d = eta / q.get_d();
  return c;
}

nlohmann::json to_json(const SingularObservable& phi) {
  nlohmann::json trig = nlohmann::json::array();
  for (const auto& t : phi.trig()) trig.push_back({{"freq", t.freq}, {"cos_coeff", t.cos_coeff}, {"sin_coeff", t.sin_coeff}});
  return {{"x0", phi.x0().to_double()},
          {"x0_hex", phi.x0().hex()},
          {"cL", phi.cL()},
          {"cR", phi.cR()},
          {"trig", trig},
          {"constant", phi.constant()},
          {"mean_zero", phi.mean_zero()},
          {"shape", to_string(phi.shape())}};
}

nlohmann::json to_json(const ClosedForms& c) {
  return {{"variation", c.variation},
          {"variation_circle", c.variation_circle},
          {"integral", c.integral},
          {"stated_integral_approximate", c.stated_integral},
          {"derivative_variation", c.derivative_variation},
          {"derivative_variation_circle", c.derivative_variation_circle},
          {"derivative_integral", c.derivative_integral}};
}

SingularObservable observable_from_json(const nlohmann::json& j, const std::string& path) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "one_sided") return make_one_sided_phi();
    if (name == "symmetric") return make_symmetric_phi();
    throw ConfigError(path, "unknown observable name '" + name + "'");
  }
  if (!j.is_object()) throw ConfigError(path, "expected an object or a preset name");
  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(path + "/" + key, "expected a number");
    return j.at(key).get<double>();
  };
  Fixed x0;
  if (j.contains("x0_hex")) {
    x0 = Fixed::from_hex(j.at("x0_hex").get<std::string>());
  } else if (j.contains("x0")) {
    const auto& v = j.at("x0");
    try {
      x0 = v.is_string() ? parse_position(v.get<std::string>()) : Fixed::from_double(v.get<double>() - std::floor(v.get<double>()));
    } catch (const Error& e) {
      throw ConfigError(path + "/x0", e.what());
    }
  }
  const double cL = number("cL", 0.0);
  const double cR = number("cR", 0.0);
  if (cL < 0) throw ConfigError(path + "/cL", "must be non-negative");
  if (cR < 0) throw ConfigError(path + "/cR", "must be non-negative");
  std::vector<TrigTerm> trig;
  if (j.contains("trig")) {
    if (!j.at("trig").is_array()) throw ConfigError(path + "/trig", "expected an array");
    for (std::size_t i = 0; i < j.at("trig").size(); ++i) {
      const auto& t = j.at("trig")[i];
      TrigTerm term;
      term.freq = t.value("freq", 1);
      term.cos_coeff = t.value("cos_coeff", 0.0);
      term.sin_coeff = t.value("sin_coeff", 0.0);
      if (term.freq < 1) throw ConfigError(path + "/trig/" + std::to_string(i) + "/freq", "must be >= 1");
      trig.push_back(term);
    }
  }
  const bool mean_zero = j.value("mean_zero", false);
  double constant = number("constant", mean_zero ? -(cL + cR) : 0.0);
  if (mean_zero && std::abs(cL + cR + constant) > 1e-12) {
    throw ConfigError(path + "/constant", "mean_zero requires constant = -(cL + cR)");
  }
  return SingularObservable(x0, cL, cR, std::move(trig), constant, mean_zero);
}

}  // namespace logcascade
