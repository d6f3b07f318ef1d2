#pragma once

// Experiment configuration for `lab run`. Parsing validates every field and
// reports the offending one as a JSON pointer.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "logcascade/contfrac.hpp"
#include "logcascade/lemma_lab.hpp"
#include "logcascade/observable.hpp"

namespace logcascade::config {

struct AlphaSpec {
  // Exactly one of: quotient list (optionally periodic with a preperiod) or a
  // decimal literal expanded to `depth` digits.
  std::vector<std::uint64_t> quotients;
  std::vector<std::uint64_t> preperiod;
  bool repeat = false;
  std::string decimal;
  std::size_t depth = 8;
  bool mirrored = false;

  contfrac::PartialQuotientSeq sequence() const;
};

struct LevelSetStage {
  std::size_t level = 5;
  std::vector<double> a = {0.0};
  std::vector<double> eps = {0.5};
  std::vector<LevelSetMode> modes = {LevelSetMode::Translate};
};

struct LemmaStage {
  std::vector<std::size_t> levels = {3, 5};
  std::size_t cells = 10;
  std::size_t grid = 128;
  double a = 0.0;
};

// "exact", "translate" or "auto" (exact while q_n <= kExactModeMaxQ).
using ModeChoice = std::string;

LevelSetMode pick_mode(const ModeChoice& choice, std::uint64_t q);

struct SetsStage {
  std::vector<std::size_t> levels = {3, 5, 7};
  double a = 0.0;
  double eps = 0.9;
  ModeChoice mode = "translate";
};

struct HolesStage {
  std::vector<std::size_t> levels = {3, 5};
  double a = 0.0;
  double eps = 0.9;
  ModeChoice mode = "auto";
  double ratio_floor = 0.25;
};

struct CoverageStage {
  std::size_t resolution = 100;
};

struct WitnessStage {
  std::string C = "0.1:0.35";
  std::vector<double> a = {-2.5, -1.0, 0.0, 1.0, 2.5};
  double eps = 0.5;
  std::vector<std::size_t> levels = {3, 5};
  ModeChoice mode = "auto";
};

struct EscapeStage {
  std::vector<std::size_t> levels = {3, 5, 7};
  std::vector<double> M = {0.5, 1.0, 2.0, 5.0, 20.0};
  std::uint64_t samples = 200000;
  double term_budget = 2.5e9;
  bool compare_symmetric = true;
};

struct GaussStage {
  std::size_t ensemble = 2000;
  std::size_t digits = 50;
  std::size_t levy_ensemble = 500;
  std::size_t levy_depth = 60;
  int precision_bits = 512;
};

struct ProfileStage {
  std::size_t level = 5;
  std::uint64_t cell = 17;
  std::size_t grid = 512;
};

struct OrbitStage {
  std::uint64_t steps = 1000000;
  std::string x0 = "0.3";
  double y0 = 0.0;
  std::uint64_t decimate = 1000;
};

struct WindowSpec {
  std::string lo;
  std::string hi;
  Window resolve() const;
};

struct ExperimentConfig {
  AlphaSpec alpha;
  nlohmann::json observable = "one_sided";
  SingularObservable phi;
  std::uint64_t seed = 11;
  int precision_bits = 256;
  int threads = 0;  // 0 keeps the OpenMP default
  std::string output = "out";
  std::optional<WindowSpec> window;
  bool allow_large_exact = false;  // lift the exact-mode limit on q

  bool run_alpha = false;
  std::optional<ProfileStage> profile;
  std::optional<LemmaStage> lemma;
  std::optional<LevelSetStage> levelset;
  std::optional<SetsStage> sets;
  std::optional<HolesStage> holes;
  std::optional<CoverageStage> coverage;
  std::optional<WitnessStage> witness;
  std::optional<EscapeStage> escape;
  std::optional<GaussStage> gauss;
  std::optional<OrbitStage> orbit;
};

inline constexpr int kMinPrecisionBits = 192;
inline constexpr int kMaxPrecisionBits = 256;

// Structural validation; throws ConfigError.
ExperimentConfig parse(const nlohmann::json& j);
ExperimentConfig load(const std::filesystem::path& path);

// Checks that depend on alpha (levels in H, table depth, cell indices).
void validate_against(const ExperimentConfig& cfg, const contfrac::ConvergentTable& table);

// Every field that affects results, with defaults filled in. The output
// directory and thread count are left out.
nlohmann::json resolved(const ExperimentConfig& cfg);

LevelSetMode parse_mode(const std::string& text, const std::string& field);

AlphaSpec parse_alpha(const nlohmann::json& j, const std::string& path = "/alpha");
nlohmann::json to_json(const AlphaSpec& a);

}  // namespace logcascade::config
