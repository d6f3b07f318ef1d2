#include "logcascade/essval_probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "logcascade/error.hpp"

namespace logcascade {

using contfrac::ConvergentTable;

LevelSet build_An(const LevelSetFamily& family, Hull hull) {
  LevelSet out;
  out.level = family.level;
  out.q = family.q;
  out.a = family.a;
  out.eps = family.eps;
  out.mode = family.mode;
  out.hull = family.mode == LevelSetMode::Translate ? hull : Hull::Nominal;
  out.window = family.window;
  out.x0 = family.x0;
  out.prediction = family.q > 1 ? 2.0 * family.eps / std::log(static_cast<double>(family.q)) : 0.0;
  std::vector<Arc> arcs;
  arcs.reserve(family.cells.size() + 1);
  for (const auto& j : family.cells) {
    if (j.empty) continue;
    Fixed left = j.left, right = j.right;
    if (out.hull == Hull::Outer) {
      left = family.outer_left(j);
      right = family.outer_right(j);
    } else if (out.hull == Hull::Inner) {
      if (!(j.length() > 2.0 * family.guard)) continue;
      left = family.inner_left(j);
      right = family.inner_right(j);
    }
    if (left <= right) {
      arcs.push_back({left, right});
    } else {
      arcs.push_back({left, Fixed::one()});
      arcs.push_back({Fixed{}, right});
    }
  }
  out.set = IntervalSet::from_arcs(std::move(arcs));
  return out;
}

PushForward push_forward(const IntervalSet& A, const ConvergentTable& table, std::size_t n) {
  PushForward out;
  out.level = n;
  out.set = A.translate(table.rotation(table.q(n)));
  out.sign = table.displacement_sign(n);
  const Fixed mag = table.displacement_magnitude(n);
  out.displacement = out.sign * mag.to_double();
  out.displacement_ok = mag.to_mpq() * table.q(n + 1) < 1;
  return out;
}

IntervalSet pull_back(const IntervalSet& A, const ConvergentTable& table, std::size_t n) {
  return A.translate(circle_neg(table.rotation(table.q(n))));
}

const char* to_string(HoleClass c) { return c == HoleClass::Good ? "good" : "bad"; }

namespace {

// Measure of `set` inside each of the sorted, disjoint `windows`.
std::vector<Fixed> measure_per_window(const IntervalSet& set, const std::vector<Arc>& windows) {
  std::vector<Fixed> out(windows.size());
  const auto& arcs = set.arcs();
  std::size_t j = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Arc& w = windows[i];
    while (j < arcs.size() && arcs[j].hi <= w.lo) ++j;
    for (std::size_t k = j; k < arcs.size() && arcs[k].lo < w.hi; ++k) {
      const Fixed lo = std::max(arcs[k].lo, w.lo);
      const Fixed hi = std::min(arcs[k].hi, w.hi);
      if (lo < hi) out[i] += hi - lo;
    }
  }
  return out;
}

// Number of whole level-q cells [x0 + k/q, x0 + (k+1)/q] inside the open arc.
std::int64_t whole_cells_inside(const Arc& h, const Fixed& x0, const mpz_class& q) {
  const mpq_class origin = x0.to_mpq();
  const mpq_class a = (h.lo.to_mpq() - origin) * q;
  const mpq_class b = (h.hi.to_mpq() - origin) * q;
  mpz_class lo, hi;
  mpz_fdiv_q(lo.get_mpz_t(), a.get_num_mpz_t(), a.get_den_mpz_t());
  lo += 1;  // first k with k > a
  mpz_cdiv_q(hi.get_mpz_t(), b.get_num_mpz_t(), b.get_den_mpz_t());
  hi -= 1;  // last k + 1 with k + 1 < b
  const mpz_class m = hi - lo;
  return m > 0 ? m.get_si() : 0;
}

std::size_t successor_level(const ConvergentTable& table, std::size_t level) {
  for (auto n : contfrac::h_set(table)) {
    if (n > level && n + 1 < table.size()) return n;
  }
  return level + 1;
}

}  // namespace

std::vector<HoleLedger> hole_accounting(const std::vector<LevelSet>& sets, const ConvergentTable& table,
                                        double ratio_floor) {
  if (sets.empty()) return {};
  for (std::size_t i = 1; i < sets.size(); ++i) {
    if (!(sets[i].level > sets[i - 1].level)) {
      throw Error(ErrorKind::LevelOrderViolation, "levels must be strictly increasing");
    }
  }
  std::vector<HoleLedger> out(sets.size());
  std::vector<IntervalSet> unions(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    unions[s] = s == 0 ? sets[0].set : unions[s - 1].unite(sets[s].set);
    HoleLedger& h = out[s];
    h.stage = s;
    h.level = sets[s].level;
    h.next_level = s + 1 < sets.size() ? sets[s + 1].level : successor_level(table, sets[s].level);
    h.ratio_floor = ratio_floor;
    if (h.next_level >= table.size()) throw Error(ErrorKind::PreconditionViolation, "table too shallow for the threshold");
    const Fixed thr = Fixed::from_ratio(mpz_class(6), table.q(h.next_level));
    const Fixed lit = Fixed::from_ratio(mpz_class(6), table.q(s + 1));
    h.threshold = thr.to_double();
    h.literal_threshold = lit.to_double();
    const IntervalSet holes = unions[s].complement();
    for (const auto& arc : holes.arcs()) {
      Hole hole;
      hole.arc = arc;
      hole.cls = arc.length() >= thr ? HoleClass::Good : HoleClass::Bad;
      hole.literal_cls = arc.length() >= lit ? HoleClass::Good : HoleClass::Bad;
      (hole.cls == HoleClass::Good ? h.good : h.bad) += 1;
      (hole.literal_cls == HoleClass::Good ? h.literal_good : h.literal_bad) += 1;
      h.holes.push_back(hole);
    }
    h.invariant = h.good >= h.bad;
  }

  for (std::size_t s = 0; s + 1 < sets.size(); ++s) {
    HoleLedger& h = out[s];
    const HoleLedger& next = out[s + 1];
    const LevelSet& A = sets[s + 1];
    h.has_transition = true;
    std::vector<Arc> windows;
    windows.reserve(h.holes.size());
    for (const auto& hole : h.holes) windows.push_back(hole.arc);
    const auto inside = measure_per_window(A.set, windows);
    const double mu_next = A.set.measure_double();

    std::size_t c = 0;
    std::uint64_t meeting_floor = 0;
    for (std::size_t i = 0; i < h.holes.size(); ++i) {
      const Arc& parent = h.holes[i].arc;
      std::uint64_t good = 0, bad = 0;
      while (c < next.holes.size() && next.holes[c].arc.lo < parent.hi) {
        if (next.holes[c].arc.lo >= parent.lo) (next.holes[c].cls == HoleClass::Good ? good : bad) += 1;
        ++c;
      }
      if (bad > 2) ++h.excess_bad;
      if (h.holes[i].cls != HoleClass::Good) continue;
      ++h.good_checked;
      const std::int64_t m = whole_cells_inside(parent, A.x0, table.q(A.level));
      if (static_cast<std::int64_t>(good) < m - 1) ++h.spawn_failures;
      const double ratio = mu_next > 0.0 ? inside[i].to_double() / (mu_next * parent.length().to_double()) : 0.0;
      h.conditional_ratios.push_back(ratio);
      if (ratio >= ratio_floor) ++meeting_floor;
    }
    h.ratio_fraction = h.good_checked ? static_cast<double>(meeting_floor) / static_cast<double>(h.good_checked) : 0.0;
  }
  return out;
}

CoverageReport coverage(const std::vector<LevelSet>& sets, std::size_t resolution) {
  CoverageReport r;
  IntervalSet acc;
  double prod = 1.0;
  double previous = 0.0;
  for (const auto& s : sets) {
    r.levels.push_back(s.level);
    const double mu = s.set.measure_double();
    r.measures.push_back(mu);
    r.measure_series += mu;
    const IntervalSet holes = acc.complement();
    const double free = holes.measure_double();
    const double cond = free > 0.0 ? s.set.intersect(holes).measure_double() / free : 0.0;
    r.conditional.push_back(cond);
    r.conditional_series += cond;
    acc = acc.unite(s.set);
    const double u = acc.measure_double();
    if (u < previous) r.monotone = false;
    previous = u;
    r.prefix_union.push_back(u);
    prod *= 1.0 - mu;
    r.independence.push_back(1.0 - prod);
  }
  if (resolution > 0) {
    std::vector<Arc> bins;
    for (std::size_t i = 0; i < resolution; ++i) {
      const mpz_class R = static_cast<unsigned long>(resolution);
      bins.push_back({Fixed::from_ratio(mpz_class(static_cast<unsigned long>(i)), R),
                      i + 1 == resolution ? Fixed::one() : Fixed::from_ratio(mpz_class(static_cast<unsigned long>(i + 1)), R)});
    }
    for (const auto& m : measure_per_window(acc, bins)) r.bins.push_back(m.to_double() * static_cast<double>(resolution));
  }
  return r;
}

WitnessRecord witness_search(const IntervalSet& C, const std::string& C_label, const SingularObservable& phi,
                             const ConvergentTable& table, const std::vector<LevelSetFamily>& families) {
  WitnessRecord w;
  w.C = C_label;
  if (!families.empty()) {
    w.a = families.front().a;
    w.eps = families.front().eps;
  }
  if (C.measure().is_zero()) throw Error(ErrorKind::PreconditionViolation, "C has zero measure");
  for (std::size_t i = 1; i < families.size(); ++i) {
    if (!(families[i].level > families[i - 1].level)) {
      throw Error(ErrorKind::LevelOrderViolation, "families must be ordered by level");
    }
  }
  const Fixed min_len = Fixed::from_double(kWitnessMinLength);
  for (const auto& fam : families) {
    const std::size_t n = fam.level;
    NearMiss miss;
    miss.level = n;
    const Fixed shift = table.rotation(table.q(n));
    const IntervalSet target = C.intersect(C.translate(circle_neg(shift)));
    for (const auto& j : fam.cells) {
      if (j.empty) continue;
      ++miss.cells_scanned;
      Fixed left = j.left, right = j.right;
      if (fam.mode == LevelSetMode::Translate) {
        if (!(j.length() > 2.0 * fam.guard)) continue;
        left = fam.inner_left(j);
        right = fam.inner_right(j);
      }
      const IntervalSet piece = IntervalSet::circle_arc(left, right).intersect(target);
      if (piece.empty()) continue;
      ++miss.cells_meeting_C;
      const Arc* best = nullptr;
      for (const auto& arc : piece.arcs()) {
        if (!best || arc.length() > best->length()) best = &arc;
      }
      miss.best_length = std::max(miss.best_length, best->length().to_double());
      if (best->length() < min_len) continue;

      const Fixed x = best->lo + best->length().half();
      const double v = rigid_sum(phi, table, x, n).value;
      if (!(std::abs(v - fam.a) < fam.eps)) {
        ++miss.rejected;
        continue;
      }
      w.found = true;
      w.level = n;
      w.l = j.l;
      w.x = x;
      w.image = circle_add(x, shift);
      w.piece_length = best->length().to_double();
      w.birkhoff_value = v;
      w.value_ok = true;
      w.x_in_C = C.contains(x);
      w.image_in_C = C.contains(w.image);
      const Fixed mag = table.displacement_magnitude(n);
      w.displacement = table.displacement_sign(n) * mag.to_double();
      w.displacement_bound = 1.0 / table.q(n + 1).get_d();
      w.displacement_ok = mag.to_mpq() * table.q(n + 1) < 1;
      w.near_misses.push_back(miss);
      return w;
    }
    w.near_misses.push_back(miss);
  }
  return w;
}

std::string describe(const IntervalSet& s) {
  std::string out;
  char buf[64];
  for (const auto& a : s.arcs()) {
    if (!out.empty()) out += ",";
    std::snprintf(buf, sizeof buf, "%.17g:%.17g", a.lo.to_double(), a.hi.to_double());
    out += buf;
  }
  return out.empty() ? "empty" : out;
}

IntervalSet parse_interval_set(const std::string& text) {
  IntervalSet out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError("C", "expected lo:hi, got '" + part + "'");
    const std::string lo = part.substr(0, colon), hi = part.substr(colon + 1);
    const Fixed l = parse_position(lo);
    const Fixed h = hi == "1" || hi == "1.0" ? Fixed::one() : parse_position(hi);
    out = out.unite(h == Fixed::one() ? IntervalSet::from_arcs({{l, h}}) : IntervalSet::circle_arc(l, h));
  }
  return out;
}

nlohmann::json to_json(const IntervalSet& s) {
  nlohmann::json arcs = nlohmann::json::array();
  for (const auto& a : s.arcs()) arcs.push_back({a.lo.hex(), a.hi.hex()});
  return {{"measure", s.measure_double()}, {"measure_exact", s.measure().hex()}, {"count", s.size()}, {"arcs", arcs}};
}

IntervalSet interval_set_from_json(const nlohmann::json& j) {
  std::vector<Arc> arcs;
  for (const auto& a : j.at("arcs")) arcs.push_back({Fixed::from_hex(a.at(0).get<std::string>()), Fixed::from_hex(a.at(1).get<std::string>())});
  return IntervalSet::from_arcs(std::move(arcs));
}

nlohmann::json to_json(const LevelSet& s, bool include_arcs) {
  const char* hull = s.hull == Hull::Nominal ? "nominal" : s.hull == Hull::Outer ? "outer" : "inner";
  nlohmann::json j = {{"level", s.level}, {"q", s.q},         {"a", s.a},
                      {"eps", s.eps},     {"mode", to_string(s.mode)}, {"hull", hull},
                      {"window", s.window.describe()}, {"window_lo", s.window.lo.hex()},
                      {"window_hi", s.window.hi.hex()}, {"x0", s.x0.hex()},
                      {"measure", s.set.measure_double()}, {"prediction", s.prediction}, {"intervals", s.set.size()}};
  if (include_arcs) j["set"] = to_json(s.set);
  return j;
}

LevelSet level_set_from_json(const nlohmann::json& j) {
  LevelSet s;
  s.level = j.at("level").get<std::size_t>();
  s.q = j.at("q").get<std::uint64_t>();
  s.a = j.at("a").get<double>();
  s.eps = j.at("eps").get<double>();
  s.mode = j.at("mode").get<std::string>() == "exact" ? LevelSetMode::Exact : LevelSetMode::Translate;
  const auto hull = j.at("hull").get<std::string>();
  s.hull = hull == "outer" ? Hull::Outer : hull == "inner" ? Hull::Inner : Hull::Nominal;
  s.window = Window{Fixed::from_hex(j.at("window_lo").get<std::string>()), Fixed::from_hex(j.at("window_hi").get<std::string>())};
  s.x0 = Fixed::from_hex(j.at("x0").get<std::string>());
  s.prediction = j.at("prediction").get<double>();
  if (j.contains("set")) s.set = interval_set_from_json(j.at("set"));
  return s;
}

nlohmann::json to_json(const HoleLedger& h, bool include_holes) {
  nlohmann::json j = {{"stage", h.stage},
                      {"level", h.level},
                      {"next_level", h.next_level},
                      {"threshold", h.threshold},
                      {"literal_threshold", h.literal_threshold},
                      {"holes", h.holes.size()},
                      {"good", h.good},
                      {"bad", h.bad},
                      {"literal_good", h.literal_good},
                      {"literal_bad", h.literal_bad},
                      {"invariant", h.invariant}};
  if (h.has_transition) {
    double lo = 0.0, hi = 0.0;
    if (!h.conditional_ratios.empty()) {
      lo = *std::min_element(h.conditional_ratios.begin(), h.conditional_ratios.end());
      hi = *std::max_element(h.conditional_ratios.begin(), h.conditional_ratios.end());
    }
    j["transition"] = {{"good_checked", h.good_checked}, {"spawn_failures", h.spawn_failures},
                       {"excess_bad", h.excess_bad},     {"ratio_floor", h.ratio_floor},
                       {"ratio_fraction", h.ratio_fraction}, {"ratio_min", lo}, {"ratio_max", hi}};
  }
  if (include_holes) {
    nlohmann::json holes = nlohmann::json::array();
    for (const auto& hole : h.holes) {
      holes.push_back({{"left", hole.arc.lo.hex()}, {"right", hole.arc.hi.hex()}, {"length", hole.arc.length().to_double()},
                       {"class", to_string(hole.cls)}, {"literal_class", to_string(hole.literal_cls)}});
    }
    j["hole_list"] = holes;
  }
  return j;
}

nlohmann::json to_json(const CoverageReport& r) {
  return {{"levels", r.levels},
          {"measures", r.measures},
          {"prefix_union", r.prefix_union},
          {"independence", r.independence},
          {"conditional", r.conditional},
          {"conditional_series", r.conditional_series},
          {"measure_series", r.measure_series},
          {"monotone", r.monotone},
          {"bins", r.bins}};
}

nlohmann::json to_json(const WitnessRecord& w) {
  nlohmann::json misses = nlohmann::json::array();
  for (const auto& m : w.near_misses) {
    misses.push_back({{"level", m.level}, {"cells_scanned", m.cells_scanned}, {"cells_meeting_C", m.cells_meeting_C},
                      {"best_length", m.best_length}, {"rejected", m.rejected}});
  }
  nlohmann::json j = {{"C", w.C}, {"a", w.a}, {"eps", w.eps}, {"found", w.found}, {"levels_scanned", misses}};
  if (w.found) {
    j["witness"] = {{"level", w.level},
                    {"cell", w.l},
                    {"x", w.x.hex()},
                    {"x_approx", w.x.to_double()},
                    {"image", w.image.hex()},
                    {"piece_length", w.piece_length},
                    {"birkhoff_value", w.birkhoff_value},
                    {"displacement", w.displacement},
                    {"displacement_bound", w.displacement_bound}};
    j["certificate"] = {{"x_in_C", w.x_in_C}, {"image_in_C", w.image_in_C}, {"value_ok", w.value_ok},
                        {"displacement_ok", w.displacement_ok}, {"certified", w.certified()}};
  }
  return j;
}

}  // namespace logcascade
