#pragma once

// Orbit summation kernels. Every sum walks y_i = y_0 + i * step in exact
// 256-bit modular arithmetic relative to the singularity and accumulates in
// double with Neumaier compensation. Long sums are cut into fixed 2^20-term
// chunks combined by a pairwise tree whose shape depends only on the term
// count, so serial and OpenMP runs agree bit for bit.

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <vector>

#include <omp.h>

#include "logcascade/error.hpp"
#include "logcascade/fixed.hpp"
#include "logcascade/observable.hpp"

namespace logcascade::kernel {

inline constexpr std::uint64_t kChunkTerms = std::uint64_t{1} << 20;

enum class Exec { Serial, Parallel };

struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;
  double abs_sum = 0.0;
  double max_abs = 0.0;
  std::uint64_t terms = 0;

  void add(double t) noexcept {
    const double s = sum + t;
    if (std::abs(sum) >= std::abs(t)) {
      comp += (sum - s) + t;
    } else {
      comp += (t - s) + sum;
    }
    sum = s;
    const double a = std::abs(t);
    abs_sum += a;
    if (a > max_abs) max_abs = a;
    ++terms;
  }

  void merge(const Accumulator& o) noexcept {
    const double c = comp + o.comp;
    const double s = sum + o.sum;
    double e;
    if (std::abs(sum) >= std::abs(o.sum)) {
      e = (sum - s) + o.sum;
    } else {
      e = (o.sum - s) + sum;
    }
    sum = s;
    comp = c + e;
    abs_sum += o.abs_sum;
    if (o.max_abs > max_abs) max_abs = o.max_abs;
    terms += o.terms;
  }

  double value() const noexcept { return sum + comp; }
  // Rounding of each term (one ulp) plus the compensated summation residue.
  double error_bound() const noexcept { return 0x1p-51 * abs_sum + 0x1p-52 * std::abs(value()); }
};

struct OrbitSum {
  Accumulator value;
  Accumulator deriv;
  std::uint64_t excluded = 0;

  void merge(const OrbitSum& o) noexcept {
    value.merge(o.value);
    deriv.merge(o.deriv);
    excluded += o.excluded;
  }
};

// Contribution of one orbit point y = {x - x0}.
struct PointEval {
  enum class Cut { None, Count, Zero };

  const SingularObservable* phi = nullptr;
  bool want_value = true;
  bool want_derivative = false;
  Cut cut = Cut::None;
  Limbs cut_width{};      // singular-side window width
  bool cut_left = true;   // window [x0 - w, x0) when true, [x0, x0 + w) otherwise
  bool cut_right = false; // two-sided windows
  const SymmetricCut* sym = nullptr;  // derivative of the symmetric cut part
  double x0 = 0.0;

  bool in_window(const Limbs& y) const noexcept {
    if (cut_left) {
      if (limbs::is_zero(y) || !limbs::less(cut_width, limbs::negate(y))) return true;
    }
    if (cut_right && limbs::less(y, cut_width)) return true;
    return false;
  }

  void operator()(const Limbs& y, OrbitSum& acc, std::int64_t index) const {
    if (sym) {
      if (sym->kept(Fixed(y))) {
        const double dR = limbs::to_double(y);
        const double dL = limbs::to_double(limbs::negate(y));
        acc.deriv.add(sym->D / dL - sym->D / dR);
      } else {
        acc.deriv.add(0.0);
        ++acc.excluded;
      }
      return;
    }
    if (cut != Cut::None && in_window(y)) {
      ++acc.excluded;
      if (cut == Cut::Zero) {
        if (want_value) acc.value.add(0.0);
        if (want_derivative) acc.deriv.add(0.0);
        return;
      }
    }
    if (phi->guarded(Fixed(y))) throw SingularityHit(index);
    const double dR = limbs::to_double(y);
    const double dL = limbs::to_double(limbs::negate(y));
    double x = 0.0;
    if (!phi->trig().empty()) {
      x = x0 + dR;
      if (x >= 1.0) x -= 1.0;
    }
    if (want_value) acc.value.add(phi->value_at(dL, dR, x));
    if (want_derivative) acc.deriv.add(phi->derivative_at(dL, dR, x));
  }
};

// {x} - 1/2 evaluated at absolute positions (offset y with x0 = 0).
struct SawtoothEval {
  void operator()(const Limbs& y, OrbitSum& acc, std::int64_t) const {
    acc.value.add(limbs::to_double(y) - 0.5);
  }
};

// Trigonometric polynomial without constant at absolute positions.
struct TrigEval {
  const std::vector<TrigTerm>* terms = nullptr;
  void operator()(const Limbs& y, OrbitSum& acc, std::int64_t) const {
    const double x = limbs::to_double(y);
    double s = 0.0;
    for (const auto& t : *terms) {
      const double arg = 2.0 * 3.14159265358979323846 * t.freq * x;
      s += t.cos_coeff * std::cos(arg) + t.sin_coeff * std::sin(arg);
    }
    acc.value.add(s);
  }
};

// One chunk: `count` consecutive points from y, index of the first is index0
// and indices advance by `index_step`.
template <class Term>
OrbitSum run_chunk(const Term& term, Limbs y, const Limbs& step, std::uint64_t count, std::int64_t index0,
                   std::int64_t index_step) {
  OrbitSum acc;
  std::int64_t index = index0;
  for (std::uint64_t i = 0; i < count; ++i) {
    term(y, acc, index);
    limbs::add(y, step);
    index += index_step;
  }
  return acc;
}

// Fixed-shape pairwise reduction of chunk results [lo, hi).
inline OrbitSum reduce_tree(const std::vector<OrbitSum>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  OrbitSum left = reduce_tree(parts, lo, mid);
  left.merge(reduce_tree(parts, mid, hi));
  return left;
}

// Sum over y0 + i step, i = 0..count-1.
template <class Term>
OrbitSum orbit_sum(const Term& term, const Fixed& y0, const Fixed& step, std::uint64_t count, Exec exec,
                   std::int64_t index0 = 0, std::int64_t index_step = 1) {
  if (count == 0) return {};
  const std::uint64_t chunks = (count + kChunkTerms - 1) / kChunkTerms;
  if (chunks == 1) return run_chunk(term, y0.frac_limbs(), step.frac_limbs(), count, index0, index_step);
  std::vector<OrbitSum> parts(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  const Limbs chunk_step = step.frac().times(kChunkTerms).frac_limbs();
  auto body = [&](std::uint64_t k) {
    try {
      Limbs start = limbs::mul_small(chunk_step, k);
      limbs::add(start, y0.frac_limbs());
      const std::uint64_t n = std::min(kChunkTerms, count - k * kChunkTerms);
      parts[k] = run_chunk(term, start, step.frac_limbs(), n,
                           index0 + static_cast<std::int64_t>(k * kChunkTerms) * index_step, index_step);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(chunks); ++k) body(static_cast<std::uint64_t>(k));
  } else {
    for (std::uint64_t k = 0; k < chunks; ++k) body(k);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reduce_tree(parts, 0, parts.size());
}

// Many independent sums of equal length, one per start; parallel over starts.
template <class Term>
std::vector<OrbitSum> batch_sums(const Term& term, const std::vector<Fixed>& starts, const Fixed& step,
                                 std::uint64_t count, Exec exec) {
  std::vector<OrbitSum> out(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  auto body = [&](std::size_t s) {
    try {
      out[s] = orbit_sum(term, starts[s], step, count, Exec::Serial);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(starts.size()); ++s) body(static_cast<std::size_t>(s));
  } else {
    for (std::size_t s = 0; s < starts.size(); ++s) body(s);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// Plain reference: one loop, one accumulator, no chunking.
template <class Term>
OrbitSum reference_sum(const Term& term, const Fixed& y0, const Fixed& step, std::uint64_t count) {
  return run_chunk(term, y0.frac_limbs(), step.frac_limbs(), count, 0, 1);
}

}  // namespace logcascade::kernel
