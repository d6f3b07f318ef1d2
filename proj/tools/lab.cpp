// lab: command-line front end for the logcascade library.
//
// Exit status: 0 on success, 2 for invalid configuration or flags (JSON
// diagnostic on stderr), 3 for computation errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "logcascade/birkhoff.hpp"
#include "logcascade/cascade_sim.hpp"
#include "logcascade/config.hpp"
#include "logcascade/contfrac.hpp"
#include "logcascade/error.hpp"
#include "logcascade/essval_probe.hpp"
#include "logcascade/io.hpp"
#include "logcascade/lemma_lab.hpp"
#include "logcascade/reports.hpp"
#include "logcascade/runner.hpp"

namespace lc = logcascade;
using lc::ConfigError;
using nlohmann::json;

namespace {

struct Globals {
  int threads = 0;
  int precision_bits = 256;
  std::uint64_t seed = 11;
  std::string json_path;
  std::string csv_path;
  std::string window;
  CLI::Option* json_opt = nullptr;
  CLI::Option* csv_opt = nullptr;
};

struct AlphaArgs {
  std::string quotients = "1,100:repeat";
  std::size_t depth = 8;
  std::string decimal;
  std::string file;
  bool mirrored = false;
};

struct PhiArgs {
  std::string preset = "one_sided";
  std::string file;
};

json read_json_file(const std::string& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw ConfigError(flag, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(flag, std::string("invalid JSON: ") + e.what());
  }
}

lc::config::AlphaSpec alpha_spec(const AlphaArgs& a) {
  if (!a.file.empty()) {
    const json j = read_json_file(a.file, "--alpha-file");
    if (j.contains("spec")) return lc::config::parse_alpha(j.at("spec"), "/spec");
    if (j.contains("alpha")) return lc::config::parse_alpha(j.at("alpha"), "/alpha");
    return lc::config::parse_alpha(j, "");
  }
  json j;
  if (!a.decimal.empty()) {
    j = {{"decimal", a.decimal}, {"depth", a.depth}};
  } else {
    j = {{"quotients", a.quotients}, {"depth", a.depth}};
  }
  j["mirrored"] = a.mirrored;
  try {
    return lc::config::parse_alpha(j, "");
  } catch (const ConfigError& e) {
    // "/quotients" -> "--quotients"
    const std::string key = e.field().empty() ? "quotients" : e.field().substr(1);
    throw ConfigError("--" + key, e.message());
  }
}

lc::SingularObservable observable(const PhiArgs& p) {
  if (!p.file.empty()) {
    const json j = read_json_file(p.file, "--phi-file");
    return lc::observable_from_json(j.contains("observable") ? j.at("observable") : j, "--phi-file");
  }
  return lc::observable_from_json(p.preset, "--phi");
}

lc::Window window_of(const Globals& g) {
  if (g.window.empty()) return {};
  const auto colon = g.window.find(':');
  if (colon == std::string::npos) throw ConfigError("--window", "expected lo:hi");
  try {
    return lc::Window{lc::parse_position(g.window.substr(0, colon)), lc::parse_position(g.window.substr(colon + 1))};
  } catch (const std::exception& e) {
    throw ConfigError("--window", e.what());
  }
}

lc::Fixed position(const std::string& text, const std::string& flag) {
  try {
    return lc::parse_position(text);
  } catch (const std::exception& e) {
    throw ConfigError(flag, e.what());
  }
}

void require_level(const lc::contfrac::ConvergentTable& t, std::size_t n, const std::string& flag, bool need_next) {
  if (n == 0 || n + (need_next ? 1 : 0) >= t.size()) {
    throw ConfigError(flag, "level " + std::to_string(n) + " is outside the convergent table (raise --depth)");
  }
}

// Writes the report and table as requested; prints JSON to stdout when no
// file target was given.
void deliver(const Globals& g, const json& report, const std::optional<lc::io::CsvTable>& table = std::nullopt) {
  const bool want_csv = g.csv_opt && g.csv_opt->count() > 0;
  const bool want_json = g.json_opt && g.json_opt->count() > 0;
  if (want_csv) {
    if (!table) throw ConfigError("--csv", "this command has no tabular output");
    if (g.csv_path.empty() || g.csv_path == "-") {
      std::cout << table->str();
    } else {
      lc::io::write_atomic(g.csv_path, table->str());
    }
  }
  if (want_json && !g.json_path.empty() && g.json_path != "-") {
    lc::io::write_atomic(g.json_path, lc::io::dump_json(report));
  } else if (want_json || !want_csv) {
    std::cout << lc::io::dump_json(report);
  }
}

void print_error(const json& j) { std::cerr << j.dump() << "\n"; }

std::string current_module = "cli";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logcascade laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  app.add_option("--precision-bits", g.precision_bits, "fixed-point fraction bits requested (192..256)");
  app.add_option("--seed", g.seed, "root seed for all random streams");
  g.json_opt = app.add_option("--json", g.json_path, "write the JSON report (stdout when no path)")->expected(0, 1);
  g.csv_opt = app.add_option("--csv", g.csv_path, "write the CSV table")->expected(0, 1);
  app.add_option("--window", g.window, "restrict level sets to the arc lo:hi");

  AlphaArgs alpha;
  PhiArgs phi;
  auto add_alpha = [&](CLI::App* c) {
    c->add_option("--quotients", alpha.quotients, "partial quotients, e.g. 1,100:repeat");
    c->add_option("--depth", alpha.depth, "quotient depth for periodic or decimal input");
    c->add_option("--decimal", alpha.decimal, "alpha as a decimal literal");
    c->add_option("--alpha-file", alpha.file, "JSON alpha spec");
    c->add_flag("--mirrored", alpha.mirrored, "use the mirrored order condition for H(alpha)");
  };
  auto add_phi = [&](CLI::App* c) {
    c->add_option("--phi", phi.preset, "observable preset: one_sided or symmetric");
    c->add_option("--phi-file", phi.file, "JSON observable descriptor");
  };
  std::function<void()> action;
  auto on = [&](CLI::App* c, const std::string& module, std::function<void()> f) {
    c->callback([&, module, f] {
      current_module = module;
      action = f;
    });
  };

  // alpha
  auto* alpha_cmd = app.add_subcommand("alpha", "continued fractions and H(alpha)");
  alpha_cmd->require_subcommand(1);
  std::vector<std::size_t> subsequence;
  auto* analyze = alpha_cmd->add_subcommand("analyze", "convergents, H(alpha), series and growth diagnostics");
  add_alpha(analyze);
  analyze->add_option("--subsequence", subsequence, "levels n_k to test against H(alpha)")->delimiter(',');
  on(analyze, "contfrac", [&] {
    const auto spec = alpha_spec(alpha);
    const auto t = lc::runner::build_table(spec);
    std::optional<std::vector<std::size_t>> sub;
    if (!subsequence.empty()) sub = subsequence;
    const auto profile = lc::contfrac::check_conditions(t, sub, spec.mirrored);
    json j = lc::reports::alpha_profile(t, profile);
    j["spec"] = lc::config::to_json(spec);
    deliver(g, j);
  });
  auto* verify = alpha_cmd->add_subcommand("verify", "exact checks of the convergent table");
  add_alpha(verify);
  on(verify, "contfrac", [&] {
    const auto spec = alpha_spec(alpha);
    const auto t = lc::runner::build_table(spec);
    const auto fast = lc::contfrac::h_set(t, spec.mirrored);
    const auto exact = lc::contfrac::h_set_exact(t, spec.mirrored);
    deliver(g, {{"table_check", lc::reports::to_json(lc::contfrac::verify_table(t))},
                {"h_set", fast},
                {"h_set_exact", exact},
                {"h_agree", fast == exact}});
  });
  std::size_t ensemble = 2000, digits = 50, levy_depth = 60;
  int expansion_bits = 512;
  std::uint64_t kmax = 20;
  auto* gauss = alpha_cmd->add_subcommand("gauss", "digit frequencies of random points");
  gauss->add_option("--ensemble", ensemble);
  gauss->add_option("--digits", digits);
  gauss->add_option("--kmax", kmax);
  gauss->add_option("--expansion-bits", expansion_bits);
  on(gauss, "contfrac", [&] {
    const auto s = lc::contfrac::gauss_digit_stats(ensemble, digits, g.seed, expansion_bits, kmax);
    deliver(g, lc::reports::to_json(s), lc::reports::gauss_csv(s));
  });
  auto* levy = alpha_cmd->add_subcommand("levy", "ensemble mean of log q_n / n");
  std::size_t levy_ensemble = 500;
  levy->add_option("--ensemble", levy_ensemble);
  levy->add_option("--depth", levy_depth);
  levy->add_option("--expansion-bits", expansion_bits);
  on(levy, "contfrac", [&] {
    deliver(g, lc::reports::to_json(lc::contfrac::levy_estimate(levy_ensemble, levy_depth, g.seed, expansion_bits)));
  });

  // birkhoff
  auto* birk = app.add_subcommand("birkhoff", "Birkhoff sums along the rotation");
  birk->require_subcommand(1);
  std::size_t level = 5, grid = 512, samples = 1000, cells = 10;
  std::uint64_t cell = 17;
  std::int64_t steps = 0;
  std::string x = "0.3";
  auto* sum = birk->add_subcommand("sum", "phi^(q_n)(x), or phi^(N)(x) with --steps");
  add_alpha(sum);
  add_phi(sum);
  sum->add_option("--level", level);
  sum->add_option("--steps", steps, "cocycle time N (overrides --level)");
  sum->add_option("--x", x);
  on(sum, "birkhoff", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    const auto f = observable(phi);
    const auto pt = position(x, "--x");
    json j;
    if (sum->count("--steps")) {
      j = lc::reports::to_json(lc::cocycle_sum(f, t, pt, steps));
      j["steps"] = steps;
    } else {
      require_level(t, level, "--level", false);
      j = lc::reports::to_json(lc::rigid_sum(f, t, pt, level));
      j["level"] = level;
      j["q"] = t.q(level).get_str();
    }
    j["x"] = pt.hex();
    deliver(g, j);
  });
  auto* profile = birk->add_subcommand("profile", "phi^(q_n) across one cell");
  add_alpha(profile);
  add_phi(profile);
  profile->add_option("--level", level);
  profile->add_option("--cell", cell);
  profile->add_option("--grid", grid);
  on(profile, "birkhoff", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    require_level(t, level, "--level", false);
    const auto pts = lc::reports::cell_profile(observable(phi), t, level, cell, grid);
    json rows = json::array();
    for (const auto& p : pts) rows.push_back({p.x.to_double(), p.vd.value.value, p.vd.derivative.value});
    deliver(g, {{"level", level}, {"cell", cell}, {"grid", grid}, {"points", rows}}, lc::reports::profile_csv(pts));
  });
  std::string dk_kind = "sawtooth";
  double eta = 0.5, D = 1.0;
  auto* dk = birk->add_subcommand("dk", "Denjoy-Koksma check at a denominator time");
  add_alpha(dk);
  add_phi(dk);
  dk->add_option("--kind", dk_kind, "sawtooth, truncated or symmetric");
  dk->add_option("--level", level);
  dk->add_option("--samples", samples);
  dk->add_option("--eta", eta);
  dk->add_option("--D", D);
  on(dk, "birkhoff", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    require_level(t, level, "--level", false);
    lc::DKObservable f;
    if (dk_kind == "sawtooth") {
      f = lc::DKObservable::sawtooth();
    } else if (dk_kind == "truncated") {
      f = lc::DKObservable::truncated_derivative(observable(phi));
    } else if (dk_kind == "symmetric") {
      f = lc::DKObservable::symmetric_derivative(D, eta);
    } else {
      throw ConfigError("--kind", "unknown kind '" + dk_kind + "'");
    }
    deliver(g, lc::reports::to_json(lc::denjoy_koksma_check(f, t, level, samples, g.seed)));
  });
  auto* closed = birk->add_subcommand("closed", "closed forms of the truncated observable at q_n");
  add_alpha(closed);
  add_phi(closed);
  closed->add_option("--level", level);
  on(closed, "observable", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    require_level(t, level, "--level", false);
    const auto bar = lc::truncate(observable(phi), t.q(level));
    if (!bar.closed_forms()) throw ConfigError("--phi", "closed forms need a constant smooth part");
    json j = lc::to_json(*bar.closed_forms());
    j["level"] = level;
    j["q"] = t.q(level).get_str();
    deliver(g, j);
  });

  // lemma
  auto* lemma = app.add_subcommand("lemma", "cell checks and level sets of phi^(q_n)");
  lemma->require_subcommand(1);
  double a = 0.0, eps = 0.5;
  std::string mode = "translate";
  bool allow_large = false;
  std::vector<std::uint64_t> cell_list;
  auto* lverify = lemma->add_subcommand("verify", "monotonicity, derivative band and thresholds on cells");
  add_alpha(lverify);
  add_phi(lverify);
  lverify->add_option("--level", level);
  lverify->add_option("--a", a);
  std::size_t verify_grid = 128;
  lverify->add_option("--grid", verify_grid);
  lverify->add_option("--cells", cells, "number of random cells");
  lverify->add_option("--cell", cell_list, "explicit cells")->delimiter(',');
  on(lverify, "lemma_lab", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    require_level(t, level, "--level", true);
    const auto f = observable(phi);
    auto ls = cell_list.empty() ? lc::random_cells(t.q_small(level), cells, g.seed, "cli:lemma", level) : cell_list;
    json reps = json::array();
    bool all = true;
    for (const auto l : ls) {
      const auto r = lc::verify_cell(f, t, level, l, a, verify_grid);
      all = all && r.monotone && r.band_ok && r.thresholds_pass();
      reps.push_back(lc::to_json(r));
    }
    deliver(g, {{"level", level}, {"a", a}, {"grid", verify_grid}, {"all_pass", all}, {"cells", reps}});
  });
  auto* levelset = lemma->add_subcommand("levelset", "intervals J where phi^(q_n) lies in [a - eps, a + eps]");
  add_alpha(levelset);
  add_phi(levelset);
  levelset->add_option("--level", level);
  levelset->add_option("--a", a);
  levelset->add_option("--eps", eps);
  levelset->add_option("--mode", mode, "exact or translate");
  levelset->add_option("--cell", cell_list, "restrict to these cells")->delimiter(',');
  levelset->add_flag("--allow-large-exact", allow_large);
  on(levelset, "lemma_lab", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    lc::LevelSetOptions opt;
    opt.mode = lc::config::parse_mode(mode, "--mode");
    opt.window = window_of(g);
    opt.cells = cell_list;
    std::sort(opt.cells.begin(), opt.cells.end());
    opt.allow_large_exact = allow_large;
    const auto fam = lc::locate_level_set(observable(phi), t, level, a, eps, opt);
    deliver(g, lc::to_json(fam, fam.cells.size() <= 20000), lc::reports::jset_csv(fam));
  });
  auto* closeness = lemma->add_subcommand("closeness", "rigid versus rational sums in random cells");
  add_alpha(closeness);
  add_phi(closeness);
  closeness->add_option("--level", level);
  closeness->add_option("--samples", samples);
  on(closeness, "lemma_lab", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    deliver(g, lc::to_json(lc::closeness_check(observable(phi), t, level, samples, g.seed)));
  });
  double cut_c = 0.125;
  auto* asym = lemma->add_subcommand("asymmetric", "two-sided observable: decomposition and cell checks");
  add_alpha(asym);
  add_phi(asym);
  asym->add_option("--level", level);
  asym->add_option("--eta", eta);
  std::size_t asym_cells = 4, asym_grid = 64;
  asym->add_option("--cells", asym_cells);
  asym->add_option("--grid", asym_grid);
  asym->add_option("--margin", cut_c);
  on(asym, "lemma_lab", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    deliver(g, lc::to_json(lc::asymmetric_pipeline_check(observable(phi), t, level, eta, asym_cells, asym_grid, g.seed, cut_c)));
  });

  // probe
  auto* probe = app.add_subcommand("probe", "level-set unions, holes, coverage and witnesses");
  probe->require_subcommand(1);
  std::vector<std::size_t> levels = {3, 5, 7};
  std::vector<double> a_list = {0.0};
  std::string in_path, hull = "nominal", C = "0.1:0.35", mode_choice = "auto";
  double ratio_floor = 0.25;
  std::size_t resolution = 100;
  auto* build = probe->add_subcommand("build", "A_n for several levels");
  add_alpha(build);
  add_phi(build);
  build->add_option("--levels", levels)->delimiter(',');
  build->add_option("--a", a);
  double build_eps = 0.9;
  build->add_option("--eps", build_eps);
  build->add_option("--mode", mode_choice, "exact, translate or auto");
  build->add_option("--hull", hull, "nominal, outer or inner");
  on(build, "essval_probe", [&] {
    const auto spec = alpha_spec(alpha);
    const auto t = lc::runner::build_table(spec);
    const auto f = observable(phi);
    const lc::Hull h = hull == "outer" ? lc::Hull::Outer : hull == "inner" ? lc::Hull::Inner : lc::Hull::Nominal;
    if (hull != "outer" && hull != "inner" && hull != "nominal") throw ConfigError("--hull", "unknown hull " + hull);
    if (mode_choice != "auto") (void)lc::config::parse_mode(mode_choice, "--mode");
    lc::runner::FamilyCache cache(f, t, window_of(g), true);
    std::vector<lc::LevelSet> sets;
    for (const auto n : levels) {
      require_level(t, n, "--levels", true);
      sets.push_back(lc::build_An(cache.get(n, a, build_eps, lc::config::pick_mode(mode_choice, t.q_small(n))), h));
    }
    deliver(g, lc::runner::sets_document(spec, f, sets));
  });
  auto* holes = probe->add_subcommand("holes", "good/bad hole ledger from a sets document");
  holes->add_option("--in", in_path)->required();
  holes->add_option("--ratio-floor", ratio_floor);
  on(holes, "essval_probe", [&] {
    const auto doc = lc::runner::load_sets_document(read_json_file(in_path, "--in"));
    const auto ledgers = lc::hole_accounting(doc.sets, doc.table, ratio_floor);
    json arr = json::array();
    for (const auto& l : ledgers) arr.push_back(lc::to_json(l));
    deliver(g, {{"ledgers", arr}}, lc::reports::ledger_csv(ledgers));
  });
  auto* cover = probe->add_subcommand("coverage", "union measures from a sets document");
  cover->add_option("--in", in_path)->required();
  cover->add_option("--resolution", resolution);
  on(cover, "essval_probe", [&] {
    const auto doc = lc::runner::load_sets_document(read_json_file(in_path, "--in"));
    const auto r = lc::coverage(doc.sets, resolution);
    deliver(g, lc::to_json(r), lc::reports::coverage_csv(r));
  });
  auto* witness = probe->add_subcommand("witness", "search x in C with x + q_n alpha in C and phi^(q_n)(x) near a");
  add_alpha(witness);
  add_phi(witness);
  witness->add_option("--C", C);
  witness->add_option("--a", a_list)->delimiter(',');
  witness->add_option("--eps", eps);
  std::vector<std::size_t> witness_levels = {3, 5};
  witness->add_option("--levels", witness_levels)->delimiter(',');
  witness->add_option("--mode", mode_choice);
  on(witness, "essval_probe", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    const auto f = observable(phi);
    lc::IntervalSet set;
    try {
      set = lc::parse_interval_set(C);
    } catch (const std::exception& e) {
      throw ConfigError("--C", e.what());
    }
    lc::runner::FamilyCache cache(f, t, window_of(g), true);
    json arr = json::array();
    for (const double av : a_list) {
      std::vector<lc::LevelSetFamily> fams;
      for (const auto n : witness_levels) {
        require_level(t, n, "--levels", true);
        fams.push_back(cache.get(n, av, eps, lc::config::pick_mode(mode_choice, t.q_small(n))));
      }
      arr.push_back(lc::to_json(lc::witness_search(set, C, f, t, fams)));
    }
    deliver(g, a_list.size() == 1 ? arr.at(0) : json{{"records", arr}});
  });

  // sim
  auto* sim = app.add_subcommand("sim", "orbits of the skew product");
  sim->require_subcommand(1);
  std::uint64_t orbit_steps = 1000000, decimate = 1000, escape_samples = 200000;
  std::string x0 = "0.3";
  double y0 = 0.0, term_budget = 2.5e9;
  std::vector<double> M = {0.5, 1, 2, 5, 20};
  bool with_symmetric = false;
  auto* orbit = sim->add_subcommand("orbit", "iterate (x, y) -> (x + alpha, y + phi(x))");
  add_alpha(orbit);
  add_phi(orbit);
  orbit->add_option("--steps", orbit_steps);
  orbit->add_option("--x0", x0);
  orbit->add_option("--y0", y0);
  orbit->add_option("--decimate", decimate);
  on(orbit, "cascade_sim", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    lc::IterateOptions opt;
    opt.decimation = decimate;
    opt.seed = g.seed;
    const auto tr = lc::iterate(observable(phi), t, position(x0, "--x0"), y0, orbit_steps, opt);
    deliver(g, lc::to_json(tr), lc::reports::orbit_csv(tr));
  });
  auto* escape = sim->add_subcommand("escape", "measure of |phi^(q_n)| <= M");
  add_alpha(escape);
  add_phi(escape);
  escape->add_option("--levels", levels)->delimiter(',');
  escape->add_option("--M", M)->delimiter(',');
  escape->add_option("--samples", escape_samples);
  escape->add_option("--term-budget", term_budget);
  escape->add_flag("--with-symmetric", with_symmetric, "add rows for the symmetric observable");
  on(escape, "cascade_sim", [&] {
    const auto t = lc::runner::build_table(alpha_spec(alpha));
    for (const auto n : levels) require_level(t, n, "--levels", false);
    lc::EscapeOptions opt;
    opt.seed = g.seed;
    opt.term_budget = term_budget;
    std::vector<std::pair<std::string, std::vector<lc::EscapeLevel>>> runs;
    runs.emplace_back(phi.file.empty() ? phi.preset : "file", lc::escape_of_mass(observable(phi), t, levels, M, escape_samples, opt));
    if (with_symmetric) {
      runs.emplace_back("symmetric", lc::escape_of_mass(lc::make_symmetric_phi(), t, levels, M, escape_samples, opt));
    }
    json j = json::object();
    for (const auto& [label, ls] : runs) {
      json arr = json::array();
      for (const auto& l : ls) arr.push_back(lc::to_json(l));
      j[label] = arr;
    }
    deliver(g, j, lc::reports::escape_csv(runs));
  });

  // run
  auto* run = app.add_subcommand("run", "execute a config file and write all artifacts");
  std::string config_path, output;
  run->add_option("--config", config_path)->required();
  run->add_option("--output", output, "override the output directory");
  on(run, "cli", [&] {
    auto cfg = lc::config::load(config_path);
    if (!output.empty()) cfg.output = output;
    if (g.threads > 0) cfg.threads = g.threads;
    if (app.count("--seed")) cfg.seed = g.seed;
    if (app.count("--precision-bits")) cfg.precision_bits = g.precision_bits;
    const auto r = lc::runner::run(cfg);
    json arts = json::array();
    for (const auto& e : r.artifacts) arts.push_back({{"path", e.path}, {"sha256", e.sha256}});
    std::cout << lc::io::dump_json({{"manifest", r.manifest.string()}, {"config_sha256", r.config_sha256}, {"artifacts", arts}});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error({{"error", "usage"}, {"message", e.what()}});
    return 2;
  }

  try {
    if (g.precision_bits < lc::config::kMinPrecisionBits || g.precision_bits > lc::config::kMaxPrecisionBits) {
      throw ConfigError("--precision-bits", "must lie in [192, 256]");
    }
    if (g.threads > 0) omp_set_num_threads(g.threads);
    if (action) action();
  } catch (const ConfigError& e) {
    print_error({{"error", "config-invalid"}, {"field", e.field()}, {"message", e.message()}});
    return 2;
  } catch (const lc::runner::StageError& e) {
    print_error({{"error", "computation"}, {"stage", e.stage()}, {"module", e.module()}, {"message", e.message()}});
    return 3;
  } catch (const lc::Error& e) {
    print_error({{"error", "computation"}, {"kind", lc::to_string(e.kind())}, {"module", current_module}, {"message", e.what()}});
    return 3;
  } catch (const std::exception& e) {
    print_error({{"error", "computation"}, {"module", current_module}, {"message", e.what()}});
    return 3;
  }
  return 0;
}
