#include "logcascade/cascade_sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "logcascade/error.hpp"
#include "logcascade/rng.hpp"

namespace logcascade {

using contfrac::ConvergentTable;

OrbitTrace iterate(const SingularObservable& phi, const ConvergentTable& table, const Fixed& x0, double y0,
                   std::uint64_t steps, const IterateOptions& options) {
  if (options.decimation == 0) throw Error(ErrorKind::PreconditionViolation, "decimation must be positive");
  OrbitTrace t;
  t.steps_requested = steps;
  t.return_windows = options.return_windows;
  t.return_counts.assign(options.return_windows.size(), 0);

  std::vector<std::uint64_t> marks;
  if (steps > 0) {
    Stream s(options.seed, "sim:checkpoint");
    for (std::size_t i = 0; i < options.checkpoints; ++i) marks.push_back(1 + s.below(steps));
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  }
  std::vector<std::pair<std::uint64_t, TraceSample>> at_marks;

  kernel::Accumulator acc;
  Fixed x = x0.frac();
  const Fixed& alpha = table.alpha();
  auto current = [&](std::uint64_t n) { return TraceSample{n, x, y0 + acc.value(), acc.error_bound()}; };
  t.samples.push_back(current(0));
  std::size_t next_mark = 0;
  for (std::uint64_t n = 0; n < steps; ++n) {
    double v;
    try {
      v = phi(x);
    } catch (const SingularityHit&) {
      t.truncated = true;
      t.truncated_at = n;
      break;
    }
    acc.add(v);
    x = circle_add(x, alpha);
    const std::uint64_t done = n + 1;
    t.steps_done = done;
    const double y = y0 + acc.value();
    for (std::size_t i = 0; i < t.return_windows.size(); ++i) {
      if (std::abs(y) <= t.return_windows[i]) ++t.return_counts[i];
    }
    if (done % options.decimation == 0) t.samples.push_back(current(done));
    while (next_mark < marks.size() && marks[next_mark] == done) {
      at_marks.emplace_back(done, current(done));
      ++next_mark;
    }
  }
  if (t.samples.back().step != t.steps_done) t.samples.push_back(current(t.steps_done));

  for (const auto& [n, sample] : at_marks) {
    Checkpoint c;
    c.step = n;
    c.y_trace = sample.y;
    const SumResult r = cocycle_sum(phi, table, x0, static_cast<std::int64_t>(n));
    c.y_cocycle = y0 + r.value;
    c.gap = std::abs(c.y_trace - c.y_cocycle);
    c.budget = sample.error_bound + r.error_bound + 0x1p-50 * std::abs(c.y_trace);
    c.ok = c.gap <= c.budget;
    t.consistent = t.consistent && c.ok;
    t.checkpoints.push_back(c);
  }
  return t;
}

std::vector<EscapeLevel> escape_of_mass(const SingularObservable& phi, const ConvergentTable& table,
                                        const std::vector<std::size_t>& levels, const std::vector<double>& M_grid,
                                        std::uint64_t samples, const EscapeOptions& options) {
  if (samples == 0) throw Error(ErrorKind::PreconditionViolation, "samples must be positive");
  std::vector<EscapeLevel> out;
  for (const std::size_t n : levels) {
    if (n == 0 || n >= table.size()) throw Error(ErrorKind::PreconditionViolation, "level outside the table");
    EscapeLevel lev;
    lev.level = n;
    lev.q = table.q_small(n);
    const double qd = static_cast<double>(lev.q);
    const double wanted = static_cast<double>(samples) * qd;
    lev.walk_length = wanted <= options.term_budget
                          ? 1
                          : static_cast<std::uint64_t>(std::ceil(wanted / options.term_budget));
    lev.starts = (samples + lev.walk_length - 1) / lev.walk_length;
    lev.samples = lev.starts * lev.walk_length;
    lev.terms = static_cast<double>(lev.starts) * (qd + 2.0 * static_cast<double>(lev.walk_length - 1));

    Stream stream(options.seed, "sim:escape", n);
    std::vector<Fixed> starts(lev.starts);
    for (auto& s : starts) s = stream.circle_point();
    const Fixed shift = table.rotation(table.q(n));
    const Fixed& alpha = table.alpha();

    // Per start: count of walk samples with |value| <= M for each M.
    std::vector<std::vector<std::uint32_t>> counts(lev.starts, std::vector<std::uint32_t>(M_grid.size(), 0));
    std::vector<std::uint64_t> hits(lev.starts, 0);
    std::vector<std::exception_ptr> errors(lev.starts);
    auto body = [&](std::size_t b) {
      try {
        auto tally = [&](double v) {
          for (std::size_t m = 0; m < M_grid.size(); ++m) {
            if (std::abs(v) <= M_grid[m]) ++counts[b][m];
          }
        };
        Fixed x = starts[b];
        double F;
        try {
          F = rigid_sum(phi, table, x, n, Exec::Serial).value;
        } catch (const SingularityHit&) {
          hits[b] = lev.walk_length;
          return;
        }
        tally(F);
        for (std::uint64_t k = 1; k < lev.walk_length; ++k) {
          try {
            F += phi(circle_add(x, shift)) - phi(x);
          } catch (const SingularityHit&) {
            hits[b] += lev.walk_length - k;
            return;
          }
          x = circle_add(x, alpha);
          tally(F);
        }
      } catch (...) {
        errors[b] = std::current_exception();
      }
    };
    if (options.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t b = 0; b < static_cast<std::int64_t>(lev.starts); ++b) body(static_cast<std::size_t>(b));
    } else {
      for (std::size_t b = 0; b < lev.starts; ++b) body(b);
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (auto h : hits) lev.guard_hits += h;

    const double B = static_cast<double>(lev.starts);
    const double L = static_cast<double>(lev.walk_length);
    for (std::size_t m = 0; m < M_grid.size(); ++m) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t b = 0; b < lev.starts; ++b) {
        const double p = counts[b][m] / L;
        sum += p;
        sq += p * p;
      }
      const double mean = sum / B;
      const double var = lev.starts > 1 ? std::max(0.0, (sq - B * mean * mean) / (B - 1.0)) : 0.0;
      lev.estimates.push_back({M_grid[m], mean, 1.96 * std::sqrt(var / B)});
    }
    out.push_back(std::move(lev));
  }
  return out;
}

nlohmann::json to_json(const OrbitTrace& t, bool include_samples) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : t.checkpoints) {
    checks.push_back({{"step", c.step}, {"y_trace", c.y_trace}, {"y_cocycle", c.y_cocycle}, {"gap", c.gap},
                      {"budget", c.budget}, {"ok", c.ok}});
  }
  nlohmann::json returns = nlohmann::json::array();
  for (std::size_t i = 0; i < t.return_windows.size(); ++i) {
    returns.push_back({{"R", t.return_windows[i]}, {"count", t.return_counts[i]}});
  }
  nlohmann::json j = {{"steps_requested", t.steps_requested},
                      {"steps_done", t.steps_done},
                      {"truncated", t.truncated},
                      {"truncated_at", t.truncated_at},
                      {"final_y", t.samples.back().y},
                      {"final_error_bound", t.samples.back().error_bound},
                      {"return_stats", returns},
                      {"checkpoints", checks},
                      {"consistent", t.consistent}};
  if (include_samples) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& p : t.samples) s.push_back({p.step, p.x.to_double(), p.y, p.error_bound});
    j["samples"] = s;
  }
  return j;
}

nlohmann::json to_json(const EscapeLevel& e) {
  nlohmann::json est = nlohmann::json::array();
  for (const auto& x : e.estimates) est.push_back({{"M", x.M}, {"estimate", x.estimate}, {"half_width", x.half_width}});
  return {{"level", e.level},     {"q", e.q},         {"starts", e.starts},   {"walk_length", e.walk_length},
          {"samples", e.samples}, {"guard_hits", e.guard_hits}, {"terms", e.terms}, {"estimates", est}};
}

}  // namespace logcascade
