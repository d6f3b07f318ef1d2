#pragma once

// `lab run`: executes the configured stages in a fixed order and writes their
// artifacts plus manifest.json into the output directory.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

#include "json.hpp"
#include "logcascade/config.hpp"
#include "logcascade/essval_probe.hpp"
#include "logcascade/io.hpp"

namespace logcascade::runner {

// A stage failed; carries the stage and the module it exercised.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, std::string module, const std::string& what)
      : std::runtime_error(stage + " (" + module + "): " + what), stage_(std::move(stage)), module_(std::move(module)),
        message_(what) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string stage_;
  std::string module_;
  std::string message_;
};

struct RunResult {
  std::filesystem::path manifest;
  std::vector<io::ArtifactEntry> artifacts;
  std::string config_sha256;
};

// Throws ConfigError for alpha-dependent validation failures and StageError
// for failures inside a stage.
RunResult run(const config::ExperimentConfig& cfg);

// Level-set families keyed by (n, a, eps, mode), built on first use.
class FamilyCache {
 public:
  FamilyCache(const SingularObservable& phi, const contfrac::ConvergentTable& table, Window window,
              bool allow_large_exact);
  const LevelSetFamily& get(std::size_t n, double a, double eps, LevelSetMode mode);

 private:
  const SingularObservable& phi_;
  const contfrac::ConvergentTable& table_;
  Window window_;
  bool allow_large_exact_;
  std::map<std::tuple<std::size_t, double, double, int>, LevelSetFamily> cache_;
};

struct SetsDocument {
  config::AlphaSpec alpha;
  contfrac::ConvergentTable table;
  SingularObservable phi;
  std::vector<LevelSet> sets;
};

// sets.json: alpha, observable and the level sets; arcs are omitted above
// kInlineArcLimit.
nlohmann::json sets_document(const config::AlphaSpec& alpha, const SingularObservable& phi,
                             const std::vector<LevelSet>& sets);
// Rebuilds omitted arcs from the stored parameters.
SetsDocument load_sets_document(const nlohmann::json& j);

contfrac::ConvergentTable build_table(const config::AlphaSpec& alpha);

// Largest arc count written inline to sets.json; bigger sets keep only their
// parameters and are rebuilt on load.
inline constexpr std::size_t kInlineArcLimit = 200000;

}  // namespace logcascade::runner
