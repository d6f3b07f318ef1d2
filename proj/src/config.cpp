#include "logcascade/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "logcascade/error.hpp"
#include "logcascade/essval_probe.hpp"

namespace logcascade::config {

using nlohmann::json;

namespace {

// Typed field access on one JSON object; unknown keys are rejected by done().
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
    return d;
  }
  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw ConfigError(at(key), "must be positive");
    return d;
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) {
    if (!has(key)) return fallback;
    const std::uint64_t v = integer(j_.at(key), at(key));
    if (v < min) throw ConfigError(at(key), "must be at least " + std::to_string(min));
    return v;
  }
  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ConfigError(at(key), "expected true or false");
    return j_.at(key).get<bool>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) throw ConfigError(at(key), "expected a string");
    return j_.at(key).get<std::string>();
  }
  std::vector<std::uint64_t> integers(const std::string& key, std::vector<std::uint64_t> fallback, std::uint64_t min) {
    if (!has(key)) return fallback;
    const auto& v = array(key);
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "/" + std::to_string(i);
      const std::uint64_t x = integer(v[i], p);
      if (x < min) throw ConfigError(p, min == 1 ? "must be positive" : "must be at least " + std::to_string(min));
      out.push_back(x);
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback, bool positive_only) {
    if (!has(key)) return fallback;
    const auto& v = array(key);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "/" + std::to_string(i);
      if (!v[i].is_number()) throw ConfigError(p, "expected a number");
      const double d = v[i].get<double>();
      if (!std::isfinite(d)) throw ConfigError(p, "must be finite");
      if (positive_only && !(d > 0.0)) throw ConfigError(p, "must be positive");
      out.push_back(d);
    }
    return out;
  }
  std::vector<std::size_t> levels(const std::string& key, std::vector<std::size_t> fallback, bool increasing) {
    if (!has(key)) return fallback;
    const auto v = integers(key, {}, 1);
    if (increasing) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] <= v[i - 1]) throw ConfigError(at(key) + "/" + std::to_string(i), "levels must be strictly increasing");
      }
    }
    return {v.begin(), v.end()};
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }
  }

 private:
  const json& array(const std::string& key) {
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array");
    if (v.empty()) throw ConfigError(at(key), "must not be empty");
    return v;
  }
  static std::uint64_t integer(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ConfigError(path, "must be non-negative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(path, "expected a non-negative integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<LevelSetMode> modes(Fields& f, const std::string& key, std::vector<LevelSetMode> fallback) {
  if (!f.has(key)) return fallback;
  const auto& v = f.raw(key);
  std::vector<LevelSetMode> out;
  if (v.is_string()) return {parse_mode(v.get<std::string>(), f.at(key))};
  if (!v.is_array() || v.empty()) throw ConfigError(f.at(key), "expected a mode name or a non-empty array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = f.at(key) + "/" + std::to_string(i);
    if (!v[i].is_string()) throw ConfigError(p, "expected a mode name");
    out.push_back(parse_mode(v[i].get<std::string>(), p));
  }
  return out;
}

ModeChoice mode_choice(Fields& f, const std::string& key, const ModeChoice& fallback) {
  const std::string m = f.text(key, fallback);
  if (m != "auto") (void)parse_mode(m, f.at(key));
  return m;
}

void check_position(const std::string& text, const std::string& path) {
  try {
    (void)parse_position(text);
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

AlphaSpec parse_alpha_at(const json& j, const std::string& path) {
  Fields f(j, path);
  AlphaSpec a;
  const bool has_q = f.has("quotients");
  const bool has_d = f.has("decimal");
  if (has_q == has_d) throw ConfigError(path, "give exactly one of 'quotients' or 'decimal'");
  a.mirrored = f.flag("mirrored", false);
  if (has_d) {
    a.decimal = f.text("decimal", "");
    a.depth = f.count("depth", 8, 1);
    mpq_class v;
    try {
      v = parse_decimal_exact(a.decimal);
    } catch (const std::exception& e) {
      throw ConfigError(path + "/decimal", e.what());
    }
    if (!(v > 0 && v < 1)) throw ConfigError(path + "/decimal", "must lie strictly between 0 and 1");
    f.done();
    return a;
  }
  if (f.raw("quotients").is_string()) {
    // Text form "1,100:repeat" or "3|1,2:repeat".
    const std::string spec = f.raw("quotients").get<std::string>();
    const std::size_t depth = f.count("depth", 8, 1);
    contfrac::PartialQuotientSeq pq;
    try {
      pq = contfrac::parse_quotients(spec, depth);
    } catch (const std::exception& e) {
      throw ConfigError(path + "/quotients", e.what());
    }
    a.repeat = pq.is_periodic();
    a.preperiod = pq.preperiod;
    a.quotients = a.repeat ? pq.period : pq.quotients;
    a.depth = a.repeat ? depth : a.quotients.size();
    f.done();
    return a;
  }
  a.quotients = f.integers("quotients", {}, 1);
  a.preperiod = f.integers("preperiod", {}, 1);
  a.repeat = f.flag("repeat", false);
  if (!a.repeat && !a.preperiod.empty()) throw ConfigError(path + "/preperiod", "only valid with repeat");
  a.depth = a.repeat ? f.count("depth", 8, 1) : f.count("depth", a.quotients.size(), 1);
  if (!a.repeat && a.depth != a.quotients.size()) {
    throw ConfigError(path + "/depth", "an explicit quotient list fixes the depth to its length");
  }
  f.done();
  return a;
}

template <class Stage, class Body>
std::optional<Stage> stage(Fields& stages, const std::string& name, Body body) {
  if (!stages.has(name)) return std::nullopt;
  Fields f(stages.raw(name), stages.at(name));
  Stage s;
  body(f, s);
  f.done();
  return s;
}

json mode_names(const std::vector<LevelSetMode>& ms) {
  json out = json::array();
  for (auto m : ms) out.push_back(to_string(m));
  return out;
}

}  // namespace

AlphaSpec parse_alpha(const json& j, const std::string& path) { return parse_alpha_at(j, path); }

json to_json(const AlphaSpec& a) {
  json alpha;
  if (!a.decimal.empty()) {
    alpha = {{"decimal", a.decimal}, {"depth", a.depth}};
  } else {
    alpha = {{"quotients", a.quotients}, {"repeat", a.repeat}, {"depth", a.depth}};
    if (a.repeat && !a.preperiod.empty()) alpha["preperiod"] = a.preperiod;
  }
  alpha["mirrored"] = a.mirrored;
  return alpha;
}

LevelSetMode pick_mode(const ModeChoice& choice, std::uint64_t q) {
  if (choice == "auto") return q <= kExactModeMaxQ ? LevelSetMode::Exact : LevelSetMode::Translate;
  return parse_mode(choice, "mode");
}

LevelSetMode parse_mode(const std::string& text, const std::string& field) {
  if (text == "exact") return LevelSetMode::Exact;
  if (text == "translate") return LevelSetMode::Translate;
  throw ConfigError(field, "unknown mode '" + text + "' (expected exact or translate)");
}

contfrac::PartialQuotientSeq AlphaSpec::sequence() const {
  if (!decimal.empty()) {
    return contfrac::expand(contfrac::FractionalValue::exact(parse_decimal_exact(decimal)), depth);
  }
  if (repeat) return contfrac::PartialQuotientSeq::periodic(preperiod, quotients, depth);
  return contfrac::PartialQuotientSeq::explicit_list(quotients);
}

Window WindowSpec::resolve() const { return Window{parse_position(lo), parse_position(hi)}; }

ExperimentConfig parse(const json& j) {
  Fields top(j, "");
  ExperimentConfig c;
  if (!top.has("alpha")) throw ConfigError("/alpha", "required");
  c.alpha = parse_alpha(top.raw("alpha"), "/alpha");
  if (top.has("observable")) c.observable = top.raw("observable");
  c.phi = observable_from_json(c.observable, "/observable");
  c.seed = top.count("seed", 11);
  c.precision_bits = static_cast<int>(top.count("precision_bits", 256));
  if (c.precision_bits < kMinPrecisionBits || c.precision_bits > kMaxPrecisionBits) {
    throw ConfigError("/precision_bits", "must lie in [" + std::to_string(kMinPrecisionBits) + ", " +
                                             std::to_string(kMaxPrecisionBits) + "]");
  }
  c.threads = static_cast<int>(top.count("threads", 0));
  c.output = top.text("output", "out");
  if (c.output.empty()) throw ConfigError("/output", "must not be empty");
  if (top.has("window") && !top.raw("window").is_null()) {
    Fields w(top.raw("window"), "/window");
    WindowSpec ws{w.text("lo", ""), w.text("hi", "")};
    check_position(ws.lo, "/window/lo");
    check_position(ws.hi, "/window/hi");
    w.done();
    c.window = ws;
  }
  c.allow_large_exact = top.flag("allow_large_exact", false);

  if (!top.has("stages")) throw ConfigError("/stages", "required");
  Fields st(top.raw("stages"), "/stages");
  if (st.has("alpha")) {
    Fields f(st.raw("alpha"), "/stages/alpha");
    f.done();
    c.run_alpha = true;
  }
  c.profile = stage<ProfileStage>(st, "profile", [](Fields& f, ProfileStage& s) {
    s.level = f.count("level", s.level, 1);
    s.cell = f.count("cell", s.cell);
    s.grid = f.count("grid", s.grid, 2);
  });
  c.lemma = stage<LemmaStage>(st, "lemma", [](Fields& f, LemmaStage& s) {
    s.levels = f.levels("levels", s.levels, false);
    s.cells = f.count("cells", s.cells, 1);
    s.grid = f.count("grid", s.grid, 3);
    s.a = f.number("a", s.a);
  });
  c.levelset = stage<LevelSetStage>(st, "levelset", [](Fields& f, LevelSetStage& s) {
    s.level = f.count("level", s.level, 1);
    s.a = f.numbers("a", s.a, false);
    s.eps = f.numbers("eps", s.eps, true);
    s.modes = modes(f, "modes", s.modes);
  });
  c.sets = stage<SetsStage>(st, "sets", [](Fields& f, SetsStage& s) {
    s.levels = f.levels("levels", s.levels, true);
    s.a = f.number("a", s.a);
    s.eps = f.positive("eps", s.eps);
    s.mode = mode_choice(f, "mode", s.mode);
  });
  c.holes = stage<HolesStage>(st, "holes", [](Fields& f, HolesStage& s) {
    s.levels = f.levels("levels", s.levels, true);
    s.a = f.number("a", s.a);
    s.eps = f.positive("eps", s.eps);
    s.mode = mode_choice(f, "mode", s.mode);
    s.ratio_floor = f.positive("ratio_floor", s.ratio_floor);
  });
  c.coverage = stage<CoverageStage>(st, "coverage", [](Fields& f, CoverageStage& s) {
    s.resolution = f.count("resolution", s.resolution, 1);
  });
  c.witness = stage<WitnessStage>(st, "witness", [](Fields& f, WitnessStage& s) {
    s.C = f.text("C", s.C);
    try {
      if (parse_interval_set(s.C).empty()) throw ConfigError(f.at("C"), "must have positive measure");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(f.at("C"), e.what());
    }
    s.a = f.numbers("a", s.a, false);
    s.eps = f.positive("eps", s.eps);
    s.levels = f.levels("levels", s.levels, true);
    s.mode = mode_choice(f, "mode", s.mode);
  });
  c.escape = stage<EscapeStage>(st, "escape", [](Fields& f, EscapeStage& s) {
    s.levels = f.levels("levels", s.levels, true);
    s.M = f.numbers("M", s.M, true);
    s.samples = f.count("samples", s.samples, 1);
    s.term_budget = f.positive("term_budget", s.term_budget);
    s.compare_symmetric = f.flag("compare_symmetric", s.compare_symmetric);
  });
  c.gauss = stage<GaussStage>(st, "gauss", [](Fields& f, GaussStage& s) {
    s.ensemble = f.count("ensemble", s.ensemble, 1);
    s.digits = f.count("digits", s.digits, 1);
    s.levy_ensemble = f.count("levy_ensemble", s.levy_ensemble, 1);
    s.levy_depth = f.count("levy_depth", s.levy_depth, 2);
    s.precision_bits = static_cast<int>(f.count("precision_bits", s.precision_bits, 64));
  });
  c.orbit = stage<OrbitStage>(st, "orbit", [](Fields& f, OrbitStage& s) {
    s.steps = f.count("steps", s.steps);
    s.x0 = f.text("x0", s.x0);
    check_position(s.x0, f.at("x0"));
    s.y0 = f.number("y0", s.y0);
    s.decimate = f.count("decimate", s.decimate, 1);
  });
  st.done();
  if (c.coverage && !c.sets) throw ConfigError("/stages/coverage", "requires the sets stage");
  top.done();
  return c;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse(j);
}

void validate_against(const ExperimentConfig& c, const contfrac::ConvergentTable& table) {
  const auto h = contfrac::h_set(table, c.alpha.mirrored);
  auto in_h = [&](std::size_t n, const std::string& path) {
    if (std::find(h.begin(), h.end(), n) == h.end()) {
      throw ConfigError(path, "level " + std::to_string(n) + " is not in H(alpha)");
    }
    if (n + 1 >= table.size()) throw ConfigError(path, "level " + std::to_string(n) + " needs q_{n+1}; raise alpha depth");
  };
  auto in_table = [&](std::size_t n, const std::string& path) {
    if (n >= table.size()) throw ConfigError(path, "level " + std::to_string(n) + " exceeds the convergent table");
  };
  auto each = [](const std::vector<std::size_t>& levels, const std::string& path, auto check) {
    for (std::size_t i = 0; i < levels.size(); ++i) check(levels[i], path + "/" + std::to_string(i));
  };
  auto exact_ok = [&](std::size_t n, LevelSetMode m, const std::string& path) {
    if (m == LevelSetMode::Exact && table.q(n) > kExactModeMaxQ && !c.allow_large_exact) {
      throw ConfigError(path, "exact mode above q = " + std::to_string(kExactModeMaxQ) + " needs allow_large_exact");
    }
  };
  if (c.profile) {
    in_table(c.profile->level, "/stages/profile/level");
    if (c.profile->cell >= table.q_small(c.profile->level)) {
      throw ConfigError("/stages/profile/cell", "must be below q_n = " + table.q(c.profile->level).get_str());
    }
  }
  if (c.lemma) each(c.lemma->levels, "/stages/lemma/levels", in_h);
  if (c.levelset) {
    in_h(c.levelset->level, "/stages/levelset/level");
    for (std::size_t i = 0; i < c.levelset->modes.size(); ++i) {
      exact_ok(c.levelset->level, c.levelset->modes[i], "/stages/levelset/modes/" + std::to_string(i));
    }
  }
  if (c.sets) {
    each(c.sets->levels, "/stages/sets/levels", in_h);
    for (auto n : c.sets->levels) exact_ok(n, pick_mode(c.sets->mode, table.q_small(n)), "/stages/sets/mode");
  }
  if (c.holes) {
    each(c.holes->levels, "/stages/holes/levels", in_h);
    for (auto n : c.holes->levels) exact_ok(n, pick_mode(c.holes->mode, table.q_small(n)), "/stages/holes/mode");
  }
  if (c.witness) {
    each(c.witness->levels, "/stages/witness/levels", in_h);
    for (auto n : c.witness->levels) exact_ok(n, pick_mode(c.witness->mode, table.q_small(n)), "/stages/witness/mode");
  }
  if (c.escape) each(c.escape->levels, "/stages/escape/levels", in_table);
}

json resolved(const ExperimentConfig& c) {
  const json alpha = to_json(c.alpha);
  json stages = json::object();
  if (c.run_alpha) stages["alpha"] = json::object();
  if (c.profile) stages["profile"] = {{"level", c.profile->level}, {"cell", c.profile->cell}, {"grid", c.profile->grid}};
  if (c.lemma) {
    stages["lemma"] = {{"levels", c.lemma->levels}, {"cells", c.lemma->cells}, {"grid", c.lemma->grid}, {"a", c.lemma->a}};
  }
  if (c.levelset) {
    stages["levelset"] = {{"level", c.levelset->level},
                          {"a", c.levelset->a},
                          {"eps", c.levelset->eps},
                          {"modes", mode_names(c.levelset->modes)}};
  }
  if (c.sets) {
    stages["sets"] = {{"levels", c.sets->levels}, {"a", c.sets->a}, {"eps", c.sets->eps}, {"mode", c.sets->mode}};
  }
  if (c.holes) {
    stages["holes"] = {{"levels", c.holes->levels},
                       {"a", c.holes->a},
                       {"eps", c.holes->eps},
                       {"mode", c.holes->mode},
                       {"ratio_floor", c.holes->ratio_floor}};
  }
  if (c.coverage) stages["coverage"] = {{"resolution", c.coverage->resolution}};
  if (c.witness) {
    stages["witness"] = {{"C", c.witness->C}, {"a", c.witness->a}, {"eps", c.witness->eps},
                          {"levels", c.witness->levels}, {"mode", c.witness->mode}};
  }
  if (c.escape) {
    stages["escape"] = {{"levels", c.escape->levels},
                        {"M", c.escape->M},
                        {"samples", c.escape->samples},
                        {"term_budget", c.escape->term_budget},
                        {"compare_symmetric", c.escape->compare_symmetric}};
  }
  if (c.gauss) {
    stages["gauss"] = {{"ensemble", c.gauss->ensemble},
                       {"digits", c.gauss->digits},
                       {"levy_ensemble", c.gauss->levy_ensemble},
                       {"levy_depth", c.gauss->levy_depth},
                       {"precision_bits", c.gauss->precision_bits}};
  }
  if (c.orbit) {
    stages["orbit"] = {{"steps", c.orbit->steps}, {"x0", c.orbit->x0}, {"y0", c.orbit->y0}, {"decimate", c.orbit->decimate}};
  }

  json j = {{"alpha", alpha},
            {"observable", to_json(c.phi)},
            {"seed", c.seed},
            {"precision_bits", c.precision_bits},
            {"allow_large_exact", c.allow_large_exact},
            {"stages", stages}};
  j["window"] = c.window ? json{{"lo", c.window->lo}, {"hi", c.window->hi}} : json(nullptr);
  return j;
}

}  // namespace logcascade::config
