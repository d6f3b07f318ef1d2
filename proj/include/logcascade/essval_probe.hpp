#pragma once

// Level-set unions A_n, their images under T^{q_n}, hole bookkeeping across
// levels, coverage of the union and essential-value witness scans.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "logcascade/intervals.hpp"
#include "logcascade/lemma_lab.hpp"

namespace logcascade {

enum class Hull { Nominal, Outer, Inner };

struct LevelSet {
  std::size_t level = 0;
  std::uint64_t q = 0;
  double a = 0.0;
  double eps = 0.0;
  LevelSetMode mode = LevelSetMode::Exact;
  Hull hull = Hull::Nominal;
  Window window;
  Fixed x0;  // origin of the cell grid
  IntervalSet set;
  double prediction = 0.0;  // 2 eps / log q_n
};

// Union of the family's intervals; translate-mode families can be widened or
// shrunk by their guard.
LevelSet build_An(const LevelSetFamily& family, Hull hull = Hull::Nominal);

struct PushForward {
  std::size_t level = 0;
  IntervalSet set;
  double displacement = 0.0;  // signed q_n alpha - p_n
  int sign = 0;
  bool displacement_ok = false;  // |q_n alpha - p_n| < 1/q_{n+1}, exact comparison
};

PushForward push_forward(const IntervalSet& A, const contfrac::ConvergentTable& table, std::size_t n);
// Inverse translation by -q_n alpha.
IntervalSet pull_back(const IntervalSet& A, const contfrac::ConvergentTable& table, std::size_t n);

enum class HoleClass { Good, Bad };

const char* to_string(HoleClass c);

struct Hole {
  Arc arc;
  HoleClass cls = HoleClass::Good;
  HoleClass literal_cls = HoleClass::Good;
};

struct HoleLedger {
  std::size_t stage = 0;
  std::size_t level = 0;       // last level inserted
  std::size_t next_level = 0;  // level defining the threshold
  double threshold = 0.0;          // 6 / q_next
  double literal_threshold = 0.0;  // 6 / q_{stage + 1}
  std::vector<Hole> holes;
  std::uint64_t good = 0;
  std::uint64_t bad = 0;
  std::uint64_t literal_good = 0;
  std::uint64_t literal_bad = 0;
  bool invariant = false;  // good >= bad

  // Transition to the next stage; empty on the final stage.
  bool has_transition = false;
  std::uint64_t good_checked = 0;
  std::uint64_t spawn_failures = 0;  // good holes with fewer than (r2 - r1 - 1) good children
  std::uint64_t excess_bad = 0;      // holes with more than two bad children
  std::vector<double> conditional_ratios;  // mu(A_next & h) / (mu(A_next) mu(h)) per good hole
  double ratio_floor = 0.25;
  double ratio_fraction = 0.0;  // share of good holes whose ratio >= ratio_floor
};

// Ledgers for stages 0..k-1 of the given sets (strictly increasing levels).
// Thresholds for the final stage use the next level of H(alpha) when the table
// has one, otherwise level + 1.
std::vector<HoleLedger> hole_accounting(const std::vector<LevelSet>& sets, const contfrac::ConvergentTable& table,
                                        double ratio_floor = 0.25);

struct CoverageReport {
  std::vector<std::size_t> levels;
  std::vector<double> measures;        // mu(A_n)
  std::vector<double> prefix_union;    // mu(A_{n_1} u ... u A_{n_k})
  std::vector<double> independence;    // 1 - prod (1 - mu(A_n))
  std::vector<double> conditional;     // mu(A_n | complement of earlier union)
  double conditional_series = 0.0;
  double measure_series = 0.0;
  bool monotone = true;
  std::vector<double> bins;            // union coverage per bin of [0,1)
};

CoverageReport coverage(const std::vector<LevelSet>& sets, std::size_t resolution = 100);

struct NearMiss {
  std::size_t level = 0;
  std::uint64_t cells_scanned = 0;
  std::uint64_t cells_meeting_C = 0;
  double best_length = 0.0;  // longest piece of J & C & T^-q C
  std::uint64_t rejected = 0;  // candidates failing re-verification
};

struct WitnessRecord {
  std::string C;
  double a = 0.0;
  double eps = 0.0;
  bool found = false;
  std::size_t level = 0;
  std::uint64_t l = 0;
  Fixed x;
  Fixed image;  // x + q_n alpha
  double piece_length = 0.0;
  double birkhoff_value = 0.0;
  double displacement = 0.0;
  double displacement_bound = 0.0;  // 1 / q_{n+1}
  bool x_in_C = false;
  bool image_in_C = false;
  bool value_ok = false;
  bool displacement_ok = false;
  std::vector<NearMiss> near_misses;
  bool certified() const noexcept { return found && x_in_C && image_in_C && value_ok && displacement_ok; }
};

inline constexpr double kWitnessMinLength = 0x1p-40;

// Scans (n, l) in order over the families (one per level, same a and eps).
WitnessRecord witness_search(const IntervalSet& C, const std::string& C_label, const SingularObservable& phi,
                             const contfrac::ConvergentTable& table, const std::vector<LevelSetFamily>& families);

std::string describe(const IntervalSet& s);
// "0.1:0.35" or "0.1:0.2,0.5:0.6".
IntervalSet parse_interval_set(const std::string& text);

nlohmann::json to_json(const IntervalSet& s);
IntervalSet interval_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LevelSet& s, bool include_arcs = true);
// Inverse of to_json; `set` stays empty when the arcs were omitted.
LevelSet level_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HoleLedger& h, bool include_holes = false);
nlohmann::json to_json(const CoverageReport& r);
nlohmann::json to_json(const WitnessRecord& w);

}  // namespace logcascade
