#include "logcascade/runner.hpp"

#include <chrono>
#include <functional>

#include <omp.h>

#include "logcascade/cascade_sim.hpp"
#include "logcascade/error.hpp"
#include "logcascade/lemma_lab.hpp"
#include "logcascade/reports.hpp"

namespace logcascade::runner {

using nlohmann::json;

FamilyCache::FamilyCache(const SingularObservable& phi, const contfrac::ConvergentTable& table, Window window,
                         bool allow_large_exact)
    : phi_(phi), table_(table), window_(window), allow_large_exact_(allow_large_exact) {}

const LevelSetFamily& FamilyCache::get(std::size_t n, double a, double eps, LevelSetMode mode) {
  const auto key = std::make_tuple(n, a, eps, static_cast<int>(mode));
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  LevelSetOptions opt;
  opt.mode = mode;
  opt.window = window_;
  opt.allow_large_exact = allow_large_exact_;
  return cache_.emplace(key, locate_level_set(phi_, table_, n, a, eps, opt)).first->second;
}

contfrac::ConvergentTable build_table(const config::AlphaSpec& alpha) {
  return contfrac::convergents(alpha.sequence());
}

json sets_document(const config::AlphaSpec& alpha, const SingularObservable& phi, const std::vector<LevelSet>& sets) {
  json arr = json::array();
  for (const auto& s : sets) {
    const bool inline_arcs = s.set.size() <= kInlineArcLimit;
    json e = to_json(s, inline_arcs);
    e["arcs_inline"] = inline_arcs;
    arr.push_back(std::move(e));
  }
  return {{"alpha", config::to_json(alpha)}, {"observable", to_json(phi)}, {"sets", arr}};
}

SetsDocument load_sets_document(const json& j) {
  SetsDocument d;
  d.alpha = config::parse_alpha(j.at("alpha"), "/alpha");
  d.table = build_table(d.alpha);
  d.phi = observable_from_json(j.at("observable"), "/observable");
  std::vector<json> pending;
  for (const auto& e : j.at("sets")) {
    LevelSet s = level_set_from_json(e);
    if (!e.value("arcs_inline", true)) {
      FamilyCache cache(d.phi, d.table, s.window, true);
      s.set = build_An(cache.get(s.level, s.a, s.eps, s.mode), s.hull).set;
    }
    d.sets.push_back(std::move(s));
  }
  return d;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string number_tag(std::size_t i) { return std::to_string(i); }

class Run {
 public:
  Run(const config::ExperimentConfig& cfg, const contfrac::ConvergentTable& table)
      : cfg_(cfg),
        table_(table),
        window_(cfg.window ? cfg.window->resolve() : Window{}),
        families_(cfg.phi, table, window_, cfg.allow_large_exact),
        manifest_(cfg.output) {}

  io::Manifest& manifest() { return manifest_; }

  // Runs `body`, attributing failures to the stage and module.
  void stage(const std::string& name, const std::string& module, const std::function<void()>& body) {
    stage_start_ = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, module, e.what());
    }
  }

  void emit(const std::string& path, const std::string& kind, const std::string& content) {
    manifest_.write(path, kind, content, seconds_since(stage_start_));
  }
  void emit_json(const std::string& path, const json& j) { emit(path, "json", io::dump_json(j)); }
  void emit_csv(const std::string& path, const io::CsvTable& t) { emit(path, "csv", t.str()); }

  void alpha() {
    const auto profile = contfrac::check_conditions(table_, std::nullopt, cfg_.alpha.mirrored);
    json j = reports::alpha_profile(table_, profile);
    j["spec"] = config::to_json(cfg_.alpha);
    j["table_check"] = reports::to_json(contfrac::verify_table(table_));
    j["h_set_exact"] = contfrac::h_set_exact(table_, cfg_.alpha.mirrored);
    emit_json("alpha.json", j);
  }

  void gauss(const config::GaussStage& g) {
    const auto stats = contfrac::gauss_digit_stats(g.ensemble, g.digits, cfg_.seed, g.precision_bits);
    const auto levy = contfrac::levy_estimate(g.levy_ensemble, g.levy_depth, cfg_.seed, g.precision_bits);
    emit_csv("gauss.csv", reports::gauss_csv(stats));
    emit_json("gauss.json", {{"gauss", reports::to_json(stats)}, {"levy", reports::to_json(levy)}});
  }

  void profile(const config::ProfileStage& p) {
    emit_csv("profile.csv", reports::profile_csv(reports::cell_profile(cfg_.phi, table_, p.level, p.cell, p.grid)));
  }

  void lemma(const config::LemmaStage& s) {
    json levels = json::array();
    for (const auto n : s.levels) {
      const auto cells = random_cells(table_.q_small(n), s.cells, cfg_.seed, "run:lemma", n);
      json reps = json::array();
      std::size_t monotone = 0, band = 0, thresholds = 0;
      for (const auto l : cells) {
        const CellReport r = verify_cell(cfg_.phi, table_, n, l, s.a, s.grid);
        monotone += r.monotone;
        band += r.band_ok;
        thresholds += r.thresholds_pass();
        reps.push_back(to_json(r));
      }
      levels.push_back({{"level", n},
                        {"q", table_.q_small(n)},
                        {"cells", cells.size()},
                        {"monotone", monotone},
                        {"band_ok", band},
                        {"thresholds", thresholds},
                        {"reports", reps}});
    }
    emit_json("lemma.json", {{"a", s.a}, {"grid", s.grid}, {"levels", levels}});
  }

  void levelset(const config::LevelSetStage& s) {
    const std::size_t combos = s.modes.size() * s.a.size() * s.eps.size();
    json summary = json::array();
    for (const auto mode : s.modes) {
      for (std::size_t ai = 0; ai < s.a.size(); ++ai) {
        for (std::size_t ei = 0; ei < s.eps.size(); ++ei) {
          const auto& fam = families_.get(s.level, s.a[ai], s.eps[ei], mode);
          const std::string file = combos == 1 ? "jset.csv"
                                               : "jset_" + std::string(to_string(mode)) + "_a" + number_tag(ai) +
                                                     "_e" + number_tag(ei) + ".csv";
          emit_csv(file, reports::jset_csv(fam));
          json j = to_json(fam, false);
          j["file"] = file;
          summary.push_back(std::move(j));
        }
      }
    }
    emit_json("levelset.json", {{"families", summary}});
  }

  LevelSet level_set(std::size_t n, double a, double eps, LevelSetMode mode) {
    return build_An(families_.get(n, a, eps, mode));
  }

  std::vector<LevelSet> sets(const config::SetsStage& s) {
    std::vector<LevelSet> out;
    for (const auto n : s.levels) out.push_back(level_set(n, s.a, s.eps, config::pick_mode(s.mode, table_.q_small(n))));
    emit_json("sets.json", sets_document(cfg_.alpha, cfg_.phi, out));
    return out;
  }

  void holes(const config::HolesStage& s) {
    std::vector<LevelSet> sets;
    for (const auto n : s.levels) sets.push_back(level_set(n, s.a, s.eps, config::pick_mode(s.mode, table_.q_small(n))));
    const auto ledgers = hole_accounting(sets, table_, s.ratio_floor);
    emit_csv("ledger.csv", reports::ledger_csv(ledgers));
    json arr = json::array();
    for (const auto& h : ledgers) arr.push_back(to_json(h));
    emit_json("holes.json", {{"levels", s.levels}, {"a", s.a}, {"eps", s.eps}, {"ledgers", arr}});
  }

  void coverage(const config::CoverageStage& s, const std::vector<LevelSet>& sets) {
    const auto r = logcascade::coverage(sets, s.resolution);
    emit_csv("coverage.csv", reports::coverage_csv(r));
    emit_json("coverage.json", to_json(r));
  }

  void witness(const config::WitnessStage& s) {
    const IntervalSet C = parse_interval_set(s.C);
    json arr = json::array();
    for (const double a : s.a) {
      std::vector<LevelSetFamily> fams;
      for (const auto n : s.levels) fams.push_back(families_.get(n, a, s.eps, config::pick_mode(s.mode, table_.q_small(n))));
      arr.push_back(to_json(witness_search(C, s.C, cfg_.phi, table_, fams)));
    }
    emit_json("witness.json", {{"C", s.C}, {"eps", s.eps}, {"levels", s.levels}, {"records", arr}});
  }

  void escape(const config::EscapeStage& s) {
    EscapeOptions opt;
    opt.seed = cfg_.seed;
    opt.term_budget = s.term_budget;
    std::vector<std::pair<std::string, std::vector<EscapeLevel>>> runs;
    runs.emplace_back("config", escape_of_mass(cfg_.phi, table_, s.levels, s.M, s.samples, opt));
    if (s.compare_symmetric) {
      runs.emplace_back("symmetric", escape_of_mass(make_symmetric_phi(), table_, s.levels, s.M, s.samples, opt));
    }
    emit_csv("escape.csv", reports::escape_csv(runs));
    json j = json::object();
    for (const auto& [label, levels] : runs) {
      json arr = json::array();
      for (const auto& l : levels) arr.push_back(to_json(l));
      j[label] = arr;
    }
    emit_json("escape.json", j);
  }

  void orbit(const config::OrbitStage& s) {
    IterateOptions opt;
    opt.decimation = s.decimate;
    opt.seed = cfg_.seed;
    const auto trace = iterate(cfg_.phi, table_, parse_position(s.x0), s.y0, s.steps, opt);
    emit_csv("orbit.csv", reports::orbit_csv(trace));
    emit_json("orbit.json", to_json(trace));
  }

 private:
  const config::ExperimentConfig& cfg_;
  const contfrac::ConvergentTable& table_;
  Window window_;
  FamilyCache families_;
  io::Manifest manifest_;
  std::chrono::steady_clock::time_point stage_start_;
};

}  // namespace

RunResult run(const config::ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  contfrac::ConvergentTable table;
  try {
    table = build_table(cfg.alpha);
  } catch (const Error& e) {
    throw StageError("alpha", "contfrac", e.what());
  }
  config::validate_against(cfg, table);

  Run r(cfg, table);
  const std::string resolved = io::dump_json(config::resolved(cfg));
  r.stage("config", "cli", [&] { r.emit("config.resolved.json", "json", resolved); });
  if (cfg.run_alpha) r.stage("alpha", "contfrac", [&] { r.alpha(); });
  if (cfg.gauss) r.stage("gauss", "contfrac", [&] { r.gauss(*cfg.gauss); });
  if (cfg.profile) r.stage("profile", "birkhoff", [&] { r.profile(*cfg.profile); });
  if (cfg.lemma) r.stage("lemma", "lemma_lab", [&] { r.lemma(*cfg.lemma); });
  if (cfg.levelset) r.stage("levelset", "lemma_lab", [&] { r.levelset(*cfg.levelset); });
  std::vector<LevelSet> sets;
  if (cfg.sets) r.stage("sets", "essval_probe", [&] { sets = r.sets(*cfg.sets); });
  if (cfg.holes) r.stage("holes", "essval_probe", [&] { r.holes(*cfg.holes); });
  if (cfg.coverage) r.stage("coverage", "essval_probe", [&] { r.coverage(*cfg.coverage, sets); });
  if (cfg.witness) r.stage("witness", "essval_probe", [&] { r.witness(*cfg.witness); });
  if (cfg.escape) r.stage("escape", "cascade_sim", [&] { r.escape(*cfg.escape); });
  if (cfg.orbit) r.stage("orbit", "cascade_sim", [&] { r.orbit(*cfg.orbit); });

  RunResult out;
  out.config_sha256 = io::sha256_hex(resolved);
  out.artifacts = r.manifest().entries();
  out.manifest = r.manifest().finish({{"config_sha256", out.config_sha256},
                                      {"seed", cfg.seed},
                                      {"threads", omp_get_max_threads()},
                                      {"precision_bits", cfg.precision_bits},
                                      {"fraction_bits_used", 256},
                                      {"wall_seconds", seconds_since(t0)}});
  return out;
}

}  // namespace logcascade::runner
