#include "logcascade/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "logcascade/error.hpp"
#include "logcascade/rng.hpp"

namespace logcascade {

using contfrac::ConvergentTable;

bool Window::contains(const Fixed& x) const noexcept {
  if (full()) return true;
  if (lo < hi) return lo <= x && x < hi;
  return x >= lo || x < hi;
}

std::string Window::describe() const {
  if (full()) return "full";
  return std::to_string(lo.to_double()) + ":" + std::to_string(hi.to_double());
}

Fixed cell_point(const Fixed& x0, std::uint64_t l, std::uint64_t q, double s) {
  const mpz_class qz = static_cast<unsigned long>(q);
  Fixed y = Fixed::from_ratio(mpz_class(static_cast<unsigned long>(l)), qz);
  if (s < 0.0) {
    y = circle_sub(y, Fixed::from_double(-s / static_cast<double>(q)));
  } else {
    y = circle_add(y, Fixed::from_double(s / static_cast<double>(q)));
  }
  return circle_add(x0, y);
}

namespace {

bool in_h(const ConvergentTable& table, std::size_t n) {
  const auto h = contfrac::h_set(table);
  return std::binary_search(h.begin(), h.end(), n);
}

void require_h(const ConvergentTable& table, std::size_t n) {
  if (!in_h(table, n)) throw Error(ErrorKind::LevelNotInH, "level " + std::to_string(n) + " is not in H(alpha)");
}

double q_log_q(std::uint64_t q) {
  const double qd = static_cast<double>(q);
  return qd * std::log(qd);
}

template <class F>
void for_each_parallel(std::size_t count, Exec exec, F&& f) {
  std::vector<std::exception_ptr> errors(count);
  auto body = [&](std::size_t i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < count; ++i) body(i);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

CellReport verify_cell(const SingularObservable& phi, const ConvergentTable& table, std::size_t n, std::uint64_t l,
                       double a, std::size_t grid, Exec exec, double margin, bool check_h) {
  if (check_h) require_h(table, n);
  if (grid < 2) throw Error(ErrorKind::PreconditionViolation, "grid needs at least 2 points");
  if (!(margin >= 0.0 && margin < 0.5)) throw Error(ErrorKind::PreconditionViolation, "margin must lie in [0, 1/2)");
  const std::uint64_t q = table.q_small(n);
  if (l >= q) throw Error(ErrorKind::PreconditionViolation, "cell index out of range");

  std::vector<Fixed> xs;
  xs.reserve(grid + 3);
  for (std::size_t j = 0; j < grid; ++j) {
    const double s = margin + (1.0 - 2.0 * margin) * static_cast<double>(j) / static_cast<double>(grid - 1);
    xs.push_back(cell_point(phi.x0(), l, q, s));
  }
  xs.push_back(cell_point(phi.x0(), l, q, 0.25));
  xs.push_back(cell_point(phi.x0(), l, q, 0.75));
  xs.push_back(cell_point(phi.x0(), l, q, 0.5));
  const auto sums = rigid_batch(phi, table, xs, n, true, exec);

  CellReport r;
  r.level = n;
  r.l = l;
  r.grid = grid;
  r.margin = margin;
  r.a = a;
  const double scale = q_log_q(q);
  const double width = 1.0 / std::sqrt(static_cast<double>(n));
  r.band_lo = (1.0 - width) * scale;
  r.band_hi = (1.0 + width) * scale;
  r.derivative_min = std::numeric_limits<double>::infinity();
  r.derivative_max = -std::numeric_limits<double>::infinity();
  r.value_min = std::numeric_limits<double>::infinity();
  r.value_max = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid; ++j) {
    const double v = sums[j].value.value;
    const double d = sums[j].derivative.value;
    if (j > 0 && !(v > sums[j - 1].value.value)) ++r.monotone_violations;
    if (!(d > r.band_lo && d < r.band_hi)) ++r.band_violations;
    r.derivative_min = std::min(r.derivative_min, d);
    r.derivative_max = std::max(r.derivative_max, d);
    r.value_min = std::min(r.value_min, v);
    r.value_max = std::max(r.value_max, v);
    r.excluded += sums[j].value.excluded;
  }
  r.monotone = r.monotone_violations == 0;
  r.band_ok = r.band_violations == 0;
  r.value_at_quarter = sums[grid].value.value;
  r.value_at_three_quarters = sums[grid + 1].value.value;
  r.derivative_mid = sums[grid + 2].derivative.value;
  r.f3 = r.value_at_three_quarters >= a + 1.0;
  r.f4 = r.value_at_quarter <= a - 1.0;
  return r;
}

const char* to_string(LevelSetMode mode) { return mode == LevelSetMode::Exact ? "exact" : "translate"; }

double JInterval::length() const noexcept {
  if (empty) return 0.0;
  return circle_sub(right, left).to_double();
}

namespace {

struct ValueSlope {
  double value = 0.0;
  double slope = 0.0;  // d value / d s
};

struct SolveResult {
  double s = 0.0;
  double value = 0.0;
  int evaluations = 0;
  bool monotone = true;
};

// Root of F(s) = target on [lo, hi] with F(lo) < target < F(hi): Newton steps
// kept inside a shrinking bracket, bisection when a step leaves it.
template <class Eval>
SolveResult solve_increasing(const Eval& eval, double target, double lo, double hi, double guess, double tol) {
  SolveResult out;
  double s = std::clamp(guess, lo, hi);
  if (s <= lo || s >= hi) s = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const ValueSlope e = eval(s);
    ++out.evaluations;
    out.s = s;
    out.value = e.value;
    const double g = e.value - target;
    if (g == 0.0) return out;
    if (g < 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    if (!(e.slope > 0.0)) {
      out.monotone = false;
      return out;
    }
    const double step = -g / e.slope;
    if (std::abs(step) <= tol) return out;
    double next = s + step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= tol) return out;
    s = next;
  }
  return out;
}

}  // namespace

double LevelSetFamily::length_ratio_mean() const {
  const double scale = q_log_q(q) / (2.0 * eps);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& j : cells) {
    if (j.empty || j.clipped_left || j.clipped_right) continue;
    sum += j.length() * scale;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double LevelSetFamily::length_ratio_min() const {
  const double scale = q_log_q(q) / (2.0 * eps);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& j : cells) {
    if (!j.empty && !j.clipped_left && !j.clipped_right) m = std::min(m, j.length() * scale);
  }
  return std::isfinite(m) ? m : 0.0;
}

double LevelSetFamily::length_ratio_max() const {
  const double scale = q_log_q(q) / (2.0 * eps);
  double m = 0.0;
  for (const auto& j : cells) {
    if (!j.empty && !j.clipped_left && !j.clipped_right) m = std::max(m, j.length() * scale);
  }
  return m;
}

double LevelSetFamily::ratio_band_lo() const { return 1.0 / (1.0 + 1.0 / std::sqrt(static_cast<double>(level))); }

double LevelSetFamily::ratio_band_hi() const { return 1.0 / (1.0 - 1.0 / std::sqrt(static_cast<double>(level))); }

Fixed LevelSetFamily::outer_left(const JInterval& j) const { return circle_sub(j.left, Fixed::from_double(guard)); }
Fixed LevelSetFamily::outer_right(const JInterval& j) const { return circle_add(j.right, Fixed::from_double(guard)); }
Fixed LevelSetFamily::inner_left(const JInterval& j) const { return circle_add(j.left, Fixed::from_double(guard)); }
Fixed LevelSetFamily::inner_right(const JInterval& j) const { return circle_sub(j.right, Fixed::from_double(guard)); }

namespace {

// Endpoints of {F in [a - eps, a + eps]} inside [1/4, 3/4] for one increasing
// branch given by `eval`.
template <class Eval>
JInterval solve_cell(const Eval& eval, double a, double eps, double tol, double guess_left, double guess_right,
                     bool& monotone) {
  JInterval j;
  monotone = true;
  const ValueSlope at_lo = eval(0.25);
  const ValueSlope at_hi = eval(0.75);
  j.evaluations = 2;
  if (!(at_lo.value < at_hi.value)) {
    monotone = false;
    return j;
  }
  if (at_lo.value > a + eps || at_hi.value < a - eps || eps <= 0.0) {
    j.empty = true;
    return j;
  }
  if (at_lo.value >= a - eps) {
    j.left_offset = 0.25;
    j.left_value = at_lo.value;
    j.clipped_left = true;
  } else {
    const auto r = solve_increasing(eval, a - eps, 0.25, 0.75, guess_left, tol);
    j.evaluations += r.evaluations;
    if (!r.monotone) {
      monotone = false;
      return j;
    }
    j.left_offset = r.s;
    j.left_value = r.value;
  }
  if (at_hi.value <= a + eps) {
    j.right_offset = 0.75;
    j.right_value = at_hi.value;
    j.clipped_right = true;
  } else {
    const auto r = solve_increasing(eval, a + eps, j.left_offset, 0.75, guess_right, tol);
    j.evaluations += r.evaluations;
    if (!r.monotone) {
      monotone = false;
      return j;
    }
    j.right_offset = r.s;
    j.right_value = r.value;
  }
  return j;
}

}  // namespace

LevelSetFamily locate_level_set(const SingularObservable& phi, const ConvergentTable& table, std::size_t n, double a,
                                double eps, const LevelSetOptions& options) {
  require_h(table, n);
  if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorKind::PreconditionViolation, "eps must lie in [0, 1)");
  LevelSetFamily fam;
  fam.level = n;
  fam.q = table.q_small(n);
  fam.a = a;
  fam.eps = eps;
  fam.mode = options.mode;
  fam.window = options.window;
  fam.x0 = phi.x0();
  const std::uint64_t q = fam.q;
  const double qd = static_cast<double>(q);
  const double tol = kPositionTolerance * qd;  // in cell units
  if (options.mode == LevelSetMode::Exact && q > kExactModeMaxQ && !options.allow_large_exact) {
    throw Error(ErrorKind::PreconditionViolation,
                "exact mode needs q_n <= " + std::to_string(kExactModeMaxQ) + " (q_n = " + std::to_string(q) + ")");
  }

  std::vector<std::uint64_t> cells = options.cells;
  if (cells.empty()) {
    for (std::uint64_t l = 0; l < q; ++l) {
      if (fam.window.full() || fam.window.contains(cell_point(phi.x0(), l, q, 0.0))) cells.push_back(l);
    }
  } else {
    for (auto l : cells) {
      if (l >= q) throw Error(ErrorKind::PreconditionViolation, "cell index out of range");
    }
  }
  if (eps == 0.0) {
    for (auto l : cells) {
      JInterval j;
      j.l = l;
      j.empty = true;
      fam.cells.push_back(j);
    }
    fam.empty = cells.size();
    return fam;
  }

  // The rational sum is 1/q periodic: one solve serves every cell and seeds
  // the exact-mode Newton iterations.
  const TruncatedObservable phibar = truncate(phi, table.q(n));
  auto rational_eval = [&](double s) {
    const auto r = rational_sum_with_derivative(phibar, cell_point(phi.x0(), 0, q, s), options.exec);
    return ValueSlope{r.value.value, r.derivative.value / qd};
  };
  bool base_monotone = true;
  const JInterval base = solve_cell(rational_eval, a, eps, tol, 0.5, 0.5, base_monotone);
  if (!base_monotone) {
    throw Error(ErrorKind::PreconditionViolation, "rational sum is not increasing on the quarter window");
  }
  const double base_left = base.empty ? 0.5 : base.left_offset;
  const double base_right = base.empty ? 0.5 : base.right_offset;

  if (options.mode == LevelSetMode::Translate) {
    fam.guard = 2.0 / table.q(n + 1).get_d();
    const double mid_value = base.empty ? 0.0 : rational_eval(0.5 * (base_left + base_right)).value;
    fam.cells.resize(cells.size());
    for_each_parallel(cells.size(), options.exec, [&](std::size_t i) {
      JInterval j = base;
      j.l = cells[i];
      j.evaluations = 0;
      if (!j.empty) {
        j.left = cell_point(phi.x0(), j.l, q, j.left_offset);
        j.right = cell_point(phi.x0(), j.l, q, j.right_offset);
        j.midpoint_value = mid_value;
      }
      fam.cells[i] = j;
    });
  } else {
    fam.cells.resize(cells.size());
    std::vector<char> bad(cells.size(), 0);
    for_each_parallel(cells.size(), options.exec, [&](std::size_t i) {
      const std::uint64_t l = cells[i];
      auto eval = [&](double s) {
        const auto r = rigid_sum_with_derivative(phi, table, cell_point(phi.x0(), l, q, s), n, Exec::Serial);
        return ValueSlope{r.value.value, r.derivative.value / qd};
      };
      bool monotone = true;
      JInterval j = solve_cell(eval, a, eps, tol, base_left, base_right, monotone);
      j.l = l;
      if (!monotone) {
        bad[i] = 1;
      } else if (!j.empty) {
        j.left = cell_point(phi.x0(), l, q, j.left_offset);
        j.right = cell_point(phi.x0(), l, q, j.right_offset);
        j.midpoint_value = eval(0.5 * (j.left_offset + j.right_offset)).value;
        ++j.evaluations;
      }
      fam.cells[i] = j;
    });
    std::vector<JInterval> kept;
    kept.reserve(fam.cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (bad[i]) {
        ++fam.monotonicity_failures;
        fam.skipped.push_back(cells[i]);
      } else {
        kept.push_back(fam.cells[i]);
      }
    }
    fam.cells = std::move(kept);
  }
  for (const auto& j : fam.cells) {
    if (j.empty) ++fam.empty;
    if (j.clipped_left || j.clipped_right) ++fam.clipped;
  }
  return fam;
}

std::vector<std::uint64_t> random_cells(std::uint64_t q, std::size_t count, std::uint64_t seed,
                                        std::string_view stream, std::uint64_t index) {
  if (count >= q) {
    std::vector<std::uint64_t> all(q);
    for (std::uint64_t l = 0; l < q; ++l) all[l] = l;
    return all;
  }
  Stream s(seed, stream, index);
  std::vector<std::uint64_t> out;
  while (out.size() < count) {
    const std::uint64_t l = s.below(q);
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ClosenessReport closeness_check(const SingularObservable& phi, const ConvergentTable& table, std::size_t n,
                                std::size_t samples, std::uint64_t seed, Exec exec) {
  require_h(table, n);
  const std::uint64_t q = table.q_small(n);
  const TruncatedObservable phibar = truncate(phi, table.q(n));
  ClosenessReport rep;
  rep.level = n;
  rep.samples = samples;
  const double qnext = table.q(n + 1).get_d();
  rep.bound = q_log_q(q) / qnext * (1.0 + 1.0 / std::sqrt(static_cast<double>(n)));

  Stream stream(seed, "lemma:closeness", n);
  std::vector<std::uint64_t> cells(samples);
  std::vector<double> offsets(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    cells[i] = stream.below(q);
    offsets[i] = stream.uniform(1.0 / 50.0, 49.0 / 50.0);
  }
  std::vector<double> gaps(samples), ratios(samples);
  std::vector<std::uint64_t> excluded(samples);
  for_each_parallel(samples, exec, [&](std::size_t i) {
    const Fixed x = cell_point(phi.x0(), cells[i], q, offsets[i]);
    const SumResult rigid = truncated_sum(phibar, table, x, n, Exec::Serial);
    const auto rational = rational_sum_with_derivative(phibar, x, Exec::Serial);
    gaps[i] = std::abs(rigid.value - rational.value.value);
    ratios[i] = gaps[i] / (rational.derivative.value / qnext);
    excluded[i] = rigid.excluded;
  });
  for (std::size_t i = 0; i < samples; ++i) {
    if (gaps[i] > rep.sup_gap) {
      rep.sup_gap = gaps[i];
      rep.sup_offset = offsets[i];
      rep.sup_cell = cells[i];
    }
    if (gaps[i] <= rep.bound) {
      ++rep.within_bound;
    } else {
      rep.min_failing_offset = std::min(rep.min_failing_offset, offsets[i]);
    }
    rep.derivative_estimate_ratio = std::max(rep.derivative_estimate_ratio, ratios[i]);
    rep.excluded += excluded[i];
  }
  rep.pass = rep.sup_gap <= rep.bound;
  return rep;
}

AsymmetricReport asymmetric_pipeline_check(const SingularObservable& phi1, const ConvergentTable& table, std::size_t n,
                                           double eta, std::size_t cell_count, std::size_t grid, std::uint64_t seed,
                                           double c, std::size_t dk_samples, Exec exec) {
  const Decomposition d = decompose_asymmetric(phi1);
  if (d.degenerate) {
    throw Error(ErrorKind::DegenerateInput, "symmetric singularity: the one-sided part vanishes");
  }
  if (d.D <= 0.0) {
    throw Error(ErrorKind::PreconditionViolation, "pipeline needs both log coefficients positive");
  }
  require_h(table, n);
  AsymmetricReport rep;
  rep.level = n;
  rep.eta = eta;
  rep.c = c;
  rep.D = d.D;
  rep.dk = denjoy_koksma_check(DKObservable::symmetric_derivative(d.D, eta), table, n, dk_samples, seed, exec);
  const std::uint64_t q = table.q_small(n);
  const double scale = q_log_q(q);
  rep.monotone = true;
  rep.thresholds = true;
  rep.centre_ratio_min = std::numeric_limits<double>::infinity();
  rep.centre_ratio_max = 0.0;
  for (auto l : random_cells(q, cell_count, seed, "lemma:asymmetric", n)) {
    CellReport r = verify_cell(phi1, table, n, l, 0.0, grid, exec, c, true);
    rep.monotone = rep.monotone && r.monotone;
    rep.thresholds = rep.thresholds && r.thresholds_pass();
    const double ratio = r.derivative_mid / scale;
    rep.centre_ratio_min = std::min(rep.centre_ratio_min, ratio);
    rep.centre_ratio_max = std::max(rep.centre_ratio_max, ratio);
    rep.band_residual = std::max({rep.band_residual, std::abs(r.derivative_min - scale) / scale,
                                  std::abs(r.derivative_max - scale) / scale});
    rep.cells.push_back(r);
  }
  rep.centre_within_25 = rep.centre_ratio_min >= 0.75 && rep.centre_ratio_max <= 1.25;
  return rep;
}

nlohmann::json to_json(const CellReport& r) {
  return {{"level", r.level},
          {"cell", r.l},
          {"grid", r.grid},
          {"margin", r.margin},
          {"a", r.a},
          {"monotone", r.monotone},
          {"monotone_violations", r.monotone_violations},
          {"derivative_band", {{"min", r.derivative_min}, {"max", r.derivative_max}, {"target_lo", r.band_lo},
                               {"target_hi", r.band_hi}, {"violations", r.band_violations}, {"ok", r.band_ok}}},
          {"derivative_mid", r.derivative_mid},
          {"value_at_quarter", r.value_at_quarter},
          {"value_at_three_quarters", r.value_at_three_quarters},
          {"thresholds_pass", {{"f3", r.f3}, {"f4", r.f4}}},
          {"excluded", r.excluded},
          {"value_range", {r.value_min, r.value_max}}};
}

nlohmann::json to_json(const ClosenessReport& r) {
  return {{"level", r.level},
          {"samples", r.samples},
          {"sup_gap", r.sup_gap},
          {"sup_cell", r.sup_cell},
          {"sup_offset", r.sup_offset},
          {"bound", r.bound},
          {"within_bound", r.within_bound},
          {"min_failing_offset", r.min_failing_offset},
          {"derivative_estimate_ratio", r.derivative_estimate_ratio},
          {"excluded", r.excluded},
          {"pass", r.pass}};
}

nlohmann::json to_json(const AsymmetricReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) cells.push_back(to_json(c));
  return {{"level", r.level},
          {"eta", r.eta},
          {"c", r.c},
          {"D", r.D},
          {"denjoy_koksma",
           {{"max_deviation", r.dk.max_deviation}, {"stated_bound", r.dk.stated_bound},
            {"variation", r.dk.variation}, {"pass", r.dk.pass}}},
          {"centre_ratio", {r.centre_ratio_min, r.centre_ratio_max}},
          {"centre_within_25", r.centre_within_25},
          {"monotone", r.monotone},
          {"thresholds", r.thresholds},
          {"band_residual", r.band_residual},
          {"cells", cells}};
}

nlohmann::json to_json(const LevelSetFamily& f, bool include_cells) {
  nlohmann::json j = {{"level", f.level},
                      {"q", f.q},
                      {"a", f.a},
                      {"eps", f.eps},
                      {"mode", to_string(f.mode)},
                      {"guard", f.guard},
                      {"window", f.window.describe()},
                      {"cells_total", f.cells.size()},
                      {"monotonicity_failures", f.monotonicity_failures},
                      {"skipped", f.skipped},
                      {"clipped", f.clipped},
                      {"empty", f.empty},
                      {"length_ratio", {{"mean", f.length_ratio_mean()}, {"min", f.length_ratio_min()},
                                        {"max", f.length_ratio_max()}, {"band_lo", f.ratio_band_lo()},
                                        {"band_hi", f.ratio_band_hi()}}}};
  if (include_cells) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : f.cells) {
      cells.push_back({{"l", c.l},
                       {"left", c.left.hex()},
                       {"right", c.right.hex()},
                       {"length", c.length()},
                       {"midpoint_value", c.midpoint_value},
                       {"clipped", c.clipped_left || c.clipped_right},
                       {"empty", c.empty}});
    }
    j["cells"] = cells;
  }
  return j;
}

}  // namespace logcascade
