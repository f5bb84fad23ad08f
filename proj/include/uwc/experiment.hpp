#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwc/pipeline.hpp"
#include "uwc/simgen.hpp"

namespace uwc {

/// Invalid or inconsistent configuration document.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InferenceConfig {
  std::size_t n_boot = 2000;
  double fdr_q = 0.05;
  double periods_per_year = kDefaultPeriodsPerYear;
};

struct StressConfig {
  double mean_shift_sd = -0.5;
  double cost_multiplier = 2.0;
  double vol_multiplier = 1.5;
  /// method whose decisions are stressed; empty selects the first non-reference method
  std::string method;
};

struct DriftConfig {
  std::size_t window = 500;
  double threshold = 2.0;
  std::size_t persistence = 5;
  std::string candidate;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string symbol = "SIM";
  std::string output_dir = "out";
  std::optional<ScenarioSpec> scenario;
  std::string market_csv;
  std::string latent_csv;
  WalkForwardConfig walk_forward;
  DecisionConfig decision;
  std::string reference;
  InferenceConfig inference;
  StressConfig stress;
  std::vector<double> cost_grid{0.5, 1.0, 1.5, 2.0};
  DriftConfig drift;
  PlaceboSpec placebo;
  /// the document as given, used for the config hash
  nlohmann::json document;

  std::string stress_method() const;
  std::string drift_candidate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
/// Hex FNV-1a of the canonical (sorted-key, compact) document.
std::string config_hash(const nlohmann::json& doc);
/// Every design default in force for this run.
nlohmann::json defaults_in_force(const RunConfig& cfg);

ScenarioSpec parse_scenario(const nlohmann::json& j);
MarketData load_market(const RunConfig& cfg, const std::filesystem::path& base_dir = {});

nlohmann::json summarize(const RunConfig& cfg, const WalkForwardResult& res);

std::vector<StressResult> run_stress(WalkForwardEngine& engine, const MethodRun& run,
                                     const std::vector<StressScenario>& scenarios);

struct CostGridRow {
  double multiplier = 1.0;
  double mean_net = 0.0;
  double mean_loss = 0.0;
  double mean_turnover = 0.0;
};
std::vector<CostGridRow> run_cost_grid(WalkForwardEngine& engine, const MethodRun& run,
                                       const std::vector<double>& multipliers);
std::string cost_grid_csv(const std::vector<CostGridRow>& rows);

const MethodRun& find_run(const WalkForwardResult& res, const std::string& id);

}  // namespace uwc
