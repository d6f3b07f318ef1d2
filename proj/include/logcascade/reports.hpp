#pragma once

// JSON reports and CSV tables for every artifact the CLI emits. Column lists
// here are the documented schemas consumed by the plotting layer.

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "logcascade/birkhoff.hpp"
#include "logcascade/cascade_sim.hpp"
#include "logcascade/contfrac.hpp"
#include "logcascade/essval_probe.hpp"
#include "logcascade/io.hpp"
#include "logcascade/lemma_lab.hpp"

namespace logcascade::reports {

namespace schema {
inline const std::vector<std::string> profile = {"x", "value", "derivative", "excluded"};
inline const std::vector<std::string> jset = {"l", "left", "right", "length", "midpoint_value"};
inline const std::vector<std::string> ledger = {"stage", "hole_left", "hole_right", "length", "class"};
inline const std::vector<std::string> coverage = {"level", "measure", "prefix_union", "independence", "conditional"};
inline const std::vector<std::string> escape = {"observable", "level", "q", "M", "estimate",
                                                "half_width", "samples", "walk_length"};
inline const std::vector<std::string> gauss = {"digit", "frequency", "prediction"};
inline const std::vector<std::string> orbit = {"step", "x", "y", "error_bound"};
}  // namespace schema

nlohmann::json alpha_profile(const contfrac::ConvergentTable& table, const contfrac::AlphaProfile& profile);
nlohmann::json to_json(const contfrac::TableCheck& c);
nlohmann::json to_json(const SumResult& r);
nlohmann::json to_json(const DKReport& r);
nlohmann::json to_json(const contfrac::GaussStats& g);
nlohmann::json to_json(const contfrac::LevyStats& s);

struct ProfilePoint {
  Fixed x;
  ValueDerivative vd;
};

// phi^(q_n) on `grid` evenly spaced points across the shrunk cell (margin 1/50).
std::vector<ProfilePoint> cell_profile(const SingularObservable& phi, const contfrac::ConvergentTable& table,
                                       std::size_t level, std::uint64_t cell, std::size_t grid,
                                       Exec exec = Exec::Parallel);

io::CsvTable profile_csv(const std::vector<ProfilePoint>& points);
io::CsvTable jset_csv(const LevelSetFamily& family);
io::CsvTable ledger_csv(const std::vector<HoleLedger>& ledgers);
io::CsvTable coverage_csv(const CoverageReport& report);
// One block of rows per labelled run.
io::CsvTable escape_csv(const std::vector<std::pair<std::string, std::vector<EscapeLevel>>>& runs);
io::CsvTable gauss_csv(const contfrac::GaussStats& g);
io::CsvTable orbit_csv(const OrbitTrace& t);

}  // namespace logcascade::reports
