#pragma once

// Orbits of the skew product (x, y) -> (x + alpha, y + phi(x)) and the law of
// phi^(q_n) near the origin.

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "logcascade/birkhoff.hpp"

namespace logcascade {

struct TraceSample {
  std::uint64_t step = 0;
  Fixed x;
  double y = 0.0;
  double error_bound = 0.0;
};

struct Checkpoint {
  std::uint64_t step = 0;
  double y_trace = 0.0;
  double y_cocycle = 0.0;
  double gap = 0.0;
  double budget = 0.0;
  bool ok = false;
};

struct OrbitTrace {
  std::uint64_t steps_requested = 0;
  std::uint64_t steps_done = 0;
  bool truncated = false;            // stopped at a guarded orbit point
  std::uint64_t truncated_at = 0;
  std::vector<TraceSample> samples;  // every `decimation` steps, plus the last
  std::vector<double> return_windows;
  std::vector<std::uint64_t> return_counts;  // steps with |y| <= R, R = return_windows[i]
  std::vector<Checkpoint> checkpoints;
  bool consistent = true;
};

struct IterateOptions {
  std::uint64_t decimation = 1000;
  std::vector<double> return_windows = {1.0, 2.0, 5.0, 10.0, 20.0};
  std::size_t checkpoints = 10;
  std::uint64_t seed = 0;
};

// y_n for n <= steps from (x0, y0); x0 absolute.
OrbitTrace iterate(const SingularObservable& phi, const contfrac::ConvergentTable& table, const Fixed& x0, double y0,
                   std::uint64_t steps, const IterateOptions& options = {});

struct EscapeEstimate {
  double M = 0.0;
  double estimate = 0.0;
  double half_width = 0.0;  // 95%, from the spread across starts
};

struct EscapeLevel {
  std::size_t level = 0;
  std::uint64_t q = 0;
  std::uint64_t starts = 0;
  std::uint64_t walk_length = 1;  // 1 means independent samples
  std::uint64_t samples = 0;      // starts * walk_length
  std::uint64_t guard_hits = 0;   // samples counted as escaped
  double terms = 0.0;
  std::vector<EscapeEstimate> estimates;
};

struct EscapeOptions {
  std::uint64_t seed = 11;
  // Orbit terms allowed per level; above it samples come in walks along the
  // rotation orbit, each step costing two observable evaluations.
  double term_budget = 2.5e9;
  Exec exec = Exec::Parallel;
};

std::vector<EscapeLevel> escape_of_mass(const SingularObservable& phi, const contfrac::ConvergentTable& table,
                                        const std::vector<std::size_t>& levels, const std::vector<double>& M_grid,
                                        std::uint64_t samples, const EscapeOptions& options = {});

nlohmann::json to_json(const OrbitTrace& t, bool include_samples = false);
nlohmann::json to_json(const EscapeLevel& e);

}  // namespace logcascade
