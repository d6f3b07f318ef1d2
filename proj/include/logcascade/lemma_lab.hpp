#pragma once

// Cell-level checks of phi^(q_n) at levels n in H(alpha): monotonicity, the
// derivative band, the quarter-point thresholds, level-set intervals J_{n,l}
// and the rigid-versus-rational closeness bound.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "logcascade/birkhoff.hpp"
#include "logcascade/contfrac.hpp"
#include "logcascade/observable.hpp"

namespace logcascade {

// Sub-arc [lo, hi) of the circle in absolute coordinates; lo == hi is the
// full circle.
struct Window {
  Fixed lo;
  Fixed hi;
  bool full() const noexcept { return lo == hi; }
  bool contains(const Fixed& x) const noexcept;
  std::string describe() const;
};

struct CellReport {
  std::size_t level = 0;
  std::uint64_t l = 0;
  std::size_t grid = 0;
  double margin = 1.0 / 50.0;  // cell shrunk by margin / q on each side
  double a = 0.0;

  bool monotone = false;
  std::uint64_t monotone_violations = 0;

  double derivative_min = 0.0;
  double derivative_max = 0.0;
  double band_lo = 0.0;  // (1 - 1/sqrt n) q log q
  double band_hi = 0.0;  // (1 + 1/sqrt n) q log q
  std::uint64_t band_violations = 0;
  bool band_ok = false;
  double derivative_mid = 0.0;  // at the cell centre

  double value_at_quarter = 0.0;
  double value_at_three_quarters = 0.0;
  bool f3 = false;  // value at 3/4 >= a + 1
  bool f4 = false;  // value at 1/4 <= a - 1
  std::uint64_t excluded = 0;
  double value_min = 0.0;
  double value_max = 0.0;
  bool thresholds_pass() const noexcept { return f3 && f4; }
};

// Requires n in H(alpha) unless `check_h` is false.
CellReport verify_cell(const SingularObservable& phi, const contfrac::ConvergentTable& table, std::size_t n,
                       std::uint64_t l, double a, std::size_t grid, Exec exec = Exec::Parallel,
                       double margin = 1.0 / 50.0, bool check_h = true);

// Offset s = (x - x0) q - l in a cell; positions l/q + s/q relative to x0.
Fixed cell_point(const Fixed& x0, std::uint64_t l, std::uint64_t q, double s);

enum class LevelSetMode { Exact, Translate };

const char* to_string(LevelSetMode mode);

struct JInterval {
  std::uint64_t l = 0;
  Fixed left;   // absolute positions
  Fixed right;
  double left_offset = 0.0;  // s values in cell units
  double right_offset = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;
  double midpoint_value = 0.0;
  bool clipped_left = false;
  bool clipped_right = false;
  bool empty = false;
  int evaluations = 0;

  double length() const noexcept;
};

struct LevelSetFamily {
  std::size_t level = 0;
  std::uint64_t q = 0;
  double a = 0.0;
  double eps = 0.0;
  LevelSetMode mode = LevelSetMode::Exact;
  double guard = 0.0;  // translate mode: 2 / q_{n+1}
  Window window;
  Fixed x0;
  std::vector<JInterval> cells;  // ordered by l
  std::uint64_t monotonicity_failures = 0;
  std::vector<std::uint64_t> skipped;
  std::uint64_t clipped = 0;
  std::uint64_t empty = 0;

  // Mean of |J| q log q / (2 eps) over unclipped nonempty cells.
  double length_ratio_mean() const;
  double length_ratio_min() const;
  double length_ratio_max() const;
  // Band implied by the derivative estimate: [1/(1 + 1/sqrt n), 1/(1 - 1/sqrt n)].
  double ratio_band_lo() const;
  double ratio_band_hi() const;
  // Outer hull / inner core of a translate-mode interval.
  Fixed outer_left(const JInterval& j) const;
  Fixed outer_right(const JInterval& j) const;
  Fixed inner_left(const JInterval& j) const;
  Fixed inner_right(const JInterval& j) const;
};

struct LevelSetOptions {
  LevelSetMode mode = LevelSetMode::Exact;
  Window window;
  // Restrict to these cells (sorted); empty means every cell in the window.
  std::vector<std::uint64_t> cells;
  bool allow_large_exact = false;  // lift the q <= 4000 exact-mode limit
  Exec exec = Exec::Parallel;
};

inline constexpr std::uint64_t kExactModeMaxQ = 4000;
inline constexpr double kPositionTolerance = 0x1p-60;
inline constexpr double kEndpointValueSlack = 1e-6;

LevelSetFamily locate_level_set(const SingularObservable& phi, const contfrac::ConvergentTable& table, std::size_t n,
                                double a, double eps, const LevelSetOptions& options = {});

struct ClosenessReport {
  std::size_t level = 0;
  std::size_t samples = 0;
  double sup_gap = 0.0;
  double sup_offset = 0.0;   // cell offset s of the worst sample
  std::uint64_t sup_cell = 0;
  double bound = 0.0;        // q log q / q_{n+1} (1 + 1/sqrt n)
  std::size_t within_bound = 0;
  double min_failing_offset = 1.0;  // smallest offset s among samples above the bound
  // Largest gap / ((rational sum)'(x) / q_{n+1}); the intermediate estimate.
  double derivative_estimate_ratio = 0.0;
  std::uint64_t excluded = 0;
  bool pass = false;
};

ClosenessReport closeness_check(const SingularObservable& phi, const contfrac::ConvergentTable& table, std::size_t n,
                                std::size_t samples, std::uint64_t seed, Exec exec = Exec::Parallel);

struct AsymmetricReport {
  std::size_t level = 0;
  double eta = 0.0;
  double c = 0.0;
  double D = 0.0;
  DKReport dk;  // symmetric truncated derivative
  std::vector<CellReport> cells;
  double centre_ratio_min = 0.0;  // derivative at cell centre / (q log q)
  double centre_ratio_max = 0.0;
  bool centre_within_25 = false;
  bool monotone = false;
  bool thresholds = false;
  double band_residual = 0.0;  // max |derivative - q log q| / (q log q) on the grids
};

AsymmetricReport asymmetric_pipeline_check(const SingularObservable& phi1, const contfrac::ConvergentTable& table,
                                           std::size_t n, double eta, std::size_t cell_count, std::size_t grid,
                                           std::uint64_t seed, double c = 0.125, std::size_t dk_samples = 200,
                                           Exec exec = Exec::Parallel);

// Distinct random cells in [0, q), sorted.
std::vector<std::uint64_t> random_cells(std::uint64_t q, std::size_t count, std::uint64_t seed,
                                        std::string_view stream, std::uint64_t index);

nlohmann::json to_json(const CellReport& r);
nlohmann::json to_json(const ClosenessReport& r);
nlohmann::json to_json(const AsymmetricReport& r);
nlohmann::json to_json(const LevelSetFamily& f, bool include_cells = true);

}  // namespace logcascade
