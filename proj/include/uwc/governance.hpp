#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uwc {

struct StressScenario {
  std::string name = "baseline";
  /// shift of the predictive mean in forecast-sd units
  double mean_shift_sd = 0.0;
  double cost_multiplier = 1.0;
  /// inflation of forecast dispersion around the mean
  double vol_multiplier = 1.0;

  void validate() const;
  bool is_identity() const { return mean_shift_sd == 0.0 && cost_multiplier == 1.0 && vol_multiplier == 1.0; }
};

/// baseline, mean shift, cost, volatility, combined.
std::vector<StressScenario> model_risk_set(double mean_shift_sd = -0.5, double cost_multiplier = 2.0,
                                           double vol_multiplier = 1.5);

struct StressResult {
  StressScenario scenario;
  double expected_loss = 0.0;
  double baseline_loss = 0.0;
  /// +inf when the baseline loss is zero and the stressed loss is positive
  double multiplier = 1.0;
};

double stress_multiplier(double stressed_loss, double baseline_loss);

/// Index of the largest expected loss (first on ties).
std::size_t worst_case(const std::vector<StressResult>& grid);

struct DriftStatistic {
  std::size_t window = 500;
  double threshold = 2.0;
  std::size_t persistence = 5;
  /// NaN where undefined (before a full window, or zero rolling sd)
  std::vector<double> z;
  std::vector<bool> defined;
  /// index at which each breach episode is first confirmed
  std::vector<std::size_t> breach_events;
  std::vector<bool> in_breach;
  double breach_frequency = 0.0;
};

DriftStatistic drift_monitor(const std::vector<double>& differential, std::size_t window = 500,
                             double threshold = 2.0, std::size_t persistence = 5);

}  // namespace uwc
