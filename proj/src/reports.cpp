#include "logcascade/reports.hpp"

#include "logcascade/error.hpp"

namespace logcascade::reports {

using nlohmann::json;

json alpha_profile(const contfrac::ConvergentTable& table, const contfrac::AlphaProfile& profile) {
  json convs = json::array();
  for (std::size_t i = 0; i < table.size(); ++i) {
    convs.push_back({{"i", i}, {"p", table.p(i).get_str()}, {"q", table.q(i).get_str()}});
  }
  json j = {{"quotients", profile.quotients},
            {"source", contfrac::to_string(table.source().source)},
            {"convergents", convs},
            {"h_set", profile.h_set},
            {"mirrored", profile.mirrored},
            {"series",
             {{"first_level", profile.series.first_level},
              {"partial_sums", profile.series.partial_sums},
              {"fitted_log_slope", profile.series.fitted_log_slope},
              {"monotone", profile.series.monotone},
              {"unbounded_trend", profile.series.unbounded_trend}}},
            {"levy", profile.levy_sequence},
            {"levy_constant", contfrac::kLevyConstant},
            {"max_quotient", profile.max_quotient},
            {"bounded_type", profile.bounded_type},
            {"liouville_score", profile.liouville_score},
            {"product_bounds", profile.product_bounds},
            {"alpha_hex", table.alpha().hex()},
            {"alpha", table.alpha().to_double()},
            {"alpha_error_log2", table.exact_rational() ? json(nullptr) : json(table.alpha_error_log2())}};
  if (profile.subsequence) {
    const auto& s = *profile.subsequence;
    j["subsequence"] = {{"levels", s.levels},
                        {"lower_density", s.lower_density},
                        {"partial_sums", s.partial_sums},
                        {"all_in_h", s.all_in_h}};
  }
  return j;
}

json to_json(const contfrac::TableCheck& c) {
  return {{"recurrence", c.recurrence},
          {"determinant", c.determinant},
          {"sandwich", c.sandwich},
          {"growth", c.growth},
          {"product_bounds", c.product_bounds},
          {"sandwich_upper_attained_at_end", c.sandwich_upper_attained_at_end},
          {"failures", c.failures},
          {"ok", c.ok()}};
}

json to_json(const SumResult& r) {
  return {{"value", r.value},
          {"error_bound", r.error_bound},
          {"excluded", r.excluded},
          {"terms", r.terms},
          {"max_abs_term", r.max_abs_term}};
}

json to_json(const DKReport& r) {
  return {{"kind", r.kind},
          {"level", r.level},
          {"q", r.q},
          {"samples", r.samples},
          {"integral", r.integral},
          {"max_deviation", r.max_deviation},
          {"variation", r.variation},
          {"stated_bound", r.stated_bound},
          {"error_budget", r.error_budget},
          {"excluded", r.excluded},
          {"pass", r.pass}};
}

json to_json(const contfrac::GaussStats& g) {
  json rows = json::array();
  for (const auto& r : g.rows) {
    rows.push_back({{"digit", r.digit}, {"count", r.count}, {"frequency", r.frequency}, {"prediction", r.prediction}});
  }
  return {{"ensemble", g.ensemble},
          {"digits_per_sample", g.digits_per_sample},
          {"seed", g.seed},
          {"total_digits", g.total_digits},
          {"rows", rows},
          {"tail_count", g.tail_count},
          {"precision_raises", g.precision_raises}};
}

json to_json(const contfrac::LevyStats& s) {
  return {{"ensemble", s.ensemble},
          {"depth", s.depth},
          {"seed", s.seed},
          {"mean", s.mean},
          {"sd", s.sd},
          {"standard_error", s.standard_error},
          {"levy_constant", contfrac::kLevyConstant},
          {"precision_raises", s.precision_raises}};
}

std::vector<ProfilePoint> cell_profile(const SingularObservable& phi, const contfrac::ConvergentTable& table,
                                       std::size_t level, std::uint64_t cell, std::size_t grid, Exec exec) {
  if (grid < 2) throw Error(ErrorKind::PreconditionViolation, "profile grid needs at least 2 points");
  if (level == 0 || level >= table.size()) throw Error(ErrorKind::PreconditionViolation, "level outside the table");
  const std::uint64_t q = table.q_small(level);
  if (cell >= q) throw Error(ErrorKind::PreconditionViolation, "cell index must be below q_n = " + std::to_string(q));
  const double margin = 1.0 / 50.0;
  std::vector<Fixed> xs(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double s = margin + (1.0 - 2.0 * margin) * static_cast<double>(i) / static_cast<double>(grid - 1);
    xs[i] = cell_point(phi.x0(), cell, q, s);
  }
  const auto vds = rigid_batch(phi, table, xs, level, true, exec);
  std::vector<ProfilePoint> out(grid);
  for (std::size_t i = 0; i < grid; ++i) out[i] = {xs[i], vds[i]};
  return out;
}

io::CsvTable profile_csv(const std::vector<ProfilePoint>& points) {
  io::CsvTable t(schema::profile);
  for (const auto& p : points) {
    t.add_row({p.x.to_double(), p.vd.value.value, p.vd.derivative.value, p.vd.value.excluded});
  }
  return t;
}

io::CsvTable jset_csv(const LevelSetFamily& family) {
  io::CsvTable t(schema::jset);
  for (const auto& j : family.cells) {
    if (j.empty) continue;
    t.add_row({j.l, j.left.to_double(), j.right.to_double(), j.length(), j.midpoint_value});
  }
  return t;
}

io::CsvTable ledger_csv(const std::vector<HoleLedger>& ledgers) {
  io::CsvTable t(schema::ledger);
  for (const auto& h : ledgers) {
    for (const auto& hole : h.holes) {
      t.add_row({h.stage, hole.arc.lo.to_double(), hole.arc.hi.to_double(), hole.arc.length().to_double(),
                 std::string(to_string(hole.cls))});
    }
  }
  return t;
}

io::CsvTable coverage_csv(const CoverageReport& r) {
  io::CsvTable t(schema::coverage);
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    t.add_row({r.levels[i], r.measures[i], r.prefix_union[i], r.independence[i], r.conditional[i]});
  }
  return t;
}

io::CsvTable escape_csv(const std::vector<std::pair<std::string, std::vector<EscapeLevel>>>& runs) {
  io::CsvTable t(schema::escape);
  for (const auto& [label, levels] : runs) {
    for (const auto& lev : levels) {
      for (const auto& e : lev.estimates) {
        t.add_row({label, lev.level, lev.q, e.M, e.estimate, e.half_width, lev.samples, lev.walk_length});
      }
    }
  }
  return t;
}

io::CsvTable gauss_csv(const contfrac::GaussStats& g) {
  io::CsvTable t(schema::gauss);
  for (const auto& r : g.rows) t.add_row({r.digit, r.frequency, r.prediction});
  return t;
}

io::CsvTable orbit_csv(const OrbitTrace& tr) {
  io::CsvTable t(schema::orbit);
  for (const auto& s : tr.samples) t.add_row({s.step, s.x.to_double(), s.y, s.error_bound});
  return t;
}

}  // namespace logcascade::reports
