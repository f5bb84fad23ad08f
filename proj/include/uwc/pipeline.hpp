#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwc/calibration.hpp"
#include "uwc/evaluation.hpp"
#include "uwc/forecasters.hpp"
#include "uwc/friction.hpp"
#include "uwc/governance.hpp"
#include "uwc/io.hpp"
#include "uwc/optimizer.hpp"
#include "uwc/utility_weights.hpp"

namespace uwc {

/// A calibration or selection window reached into the embargoed or future region.
struct LeakageError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class CalibrationKind { none, pit_remap, quantile_recal, uwc };
const char* to_string(CalibrationKind k);
CalibrationKind calibration_kind_from(const std::string& s);

struct MethodSpec {
  std::string id;
  ForecasterConfig forecaster;
  CalibrationKind calibration = CalibrationKind::none;
};

enum class RefitScheme { rolling, expanding };

struct WalkForwardConfig {
  std::size_t t_train = 1000;
  std::size_t t_val = 500;
  std::size_t t_test = 500;
  std::size_t embargo = 1;
  std::size_t horizon = 1;
  RefitScheme refit = RefitScheme::rolling;
  /// 0 refits calibration once per block; k > 0 also refits every k periods inside the block
  std::size_t refit_interval = 0;
  std::vector<MethodSpec> methods;
  std::vector<double> warp_lambdas{1e-5, 1e-4, 1e-3};
  std::vector<double> ewma_lambdas{0.9, 0.94, 0.97};

  void validate() const;
};

struct DecisionConfig {
  double gamma = 1.0;
  FrictionModel friction;
  double position_bound = 1.0;
  double turnover_cap = 1e6;
  double leverage_cap = 1e6;
  std::optional<double> participation_cap;
  /// planning curvature used with square-root impact (the realized cost is not quadratic)
  double planning_eta_quad = 0.0;
  Utility utility;
  KappaProfile kappa_profile = KappaProfile::constant;
  std::size_t kappa_window = 500;
  DiagnosticGrid grid;
  UwcOptions uwc;
  SolverSettings solver = [] {
    SolverSettings s;
    s.recover_multipliers = false;
    return s;
  }();

  void validate() const;
};

struct MarketData {
  std::string symbol = "SIM";
  std::vector<MarketObservation> market;
  std::optional<LatentSeries> latent;
};

enum class PlaceboMode { none, shuffle_within_block, time_shift };

struct PlaceboSpec {
  PlaceboMode mode = PlaceboMode::none;
  std::size_t shift = 0;
};

struct BlockLayout {
  std::size_t origin = 0;
  std::size_t test_start = 0;
  std::size_t test_end = 0;
  std::size_t val_start = 0;
  std::size_t val_end = 0;
  std::size_t select_from = 0;
  std::size_t select_to = 0;
  std::size_t final_from = 0;
  std::size_t final_to = 0;
};

/// Throws LeakageError unless [from, to) ends at or before test_start - embargo.
void leakage_guard(std::size_t from, std::size_t to, std::size_t test_start, std::size_t embargo, const char* what);

std::vector<BlockLayout> block_layout(const WalkForwardConfig& wf, std::size_t origin, std::size_t T);

/// A fitted post-processing map.
struct Calibrator {
  CalibrationKind kind = CalibrationKind::none;
  CalibrationWarp warp;
  MonotoneMap pit_map;
  LevelMap level_map;
  bool identity = true;
  std::size_t fitted_from = 0;
  std::size_t fitted_to = 0;
  PredictiveDistribution apply(const PredictiveDistribution& dist) const;
};

struct Candidate {
  double warp_lambda = 1e-4;
  double ewma_lambda = 0.94;
};

struct BlockRecord {
  std::size_t block = 0;
  Candidate selected;
  std::vector<double> validation_losses;
  std::string warning;
};

struct MethodRun {
  MethodSpec spec;
  std::vector<BlockRecord> blocks;
  std::vector<Calibrator> calibrators;
  /// per test period: calibrator index and forecaster variant
  std::vector<std::size_t> test_index;
  std::vector<std::size_t> calibrator_of;
  std::vector<ForecasterConfig> variant_of;
  double w_before_test = 0.0;
  double mean_planned_cost = 0.0;
  double mean_realized_cost = 0.0;
};

struct WalkForwardResult {
  EvaluationPanel panel;
  std::vector<BlockLayout> layout;
  std::vector<MethodRun> runs;
  std::vector<double> kappa;
};

/// Perturbation applied to the calibrated forecast during a replay.
PredictiveDistribution perturb_forecast(const PredictiveDistribution& dist, double mean_shift_sd, double vol_mult);

class WalkForwardEngine {
 public:
  WalkForwardEngine(MarketData data, WalkForwardConfig wf, DecisionConfig dc, std::uint64_t seed,
                    PlaceboSpec placebo = {});
  ~WalkForwardEngine();
  WalkForwardEngine(const WalkForwardEngine&) = delete;
  WalkForwardEngine& operator=(const WalkForwardEngine&) = delete;

  WalkForwardResult run();
  /// Re-runs the test-period decisions of one method with frozen calibrators and hyperparameters.
  EvaluationPanel replay(const MethodRun& run, const StressScenario& scenario);

  std::size_t origin() const;
  const std::vector<double>& kappa() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

WalkForwardResult run_walk_forward(const MarketData& data, const WalkForwardConfig& wf, const DecisionConfig& dc,
                                   std::uint64_t seed, PlaceboSpec placebo = {});

}  // namespace uwc
