#pragma once

#include <string>
#include <vector>

#include "uwc/distribution.hpp"
#include "uwc/rng.hpp"

namespace uwc {

enum class ForecasterKind { rolling_empirical, ewma_parametric, overconfident_sim };
enum class Innovation { gaussian, student_t };

struct ForecasterConfig {
  ForecasterKind kind = ForecasterKind::ewma_parametric;
  std::size_t window = 250;
  double ewma_lambda = 0.94;
  Innovation innovation = Innovation::gaussian;
  double nu = 5.0;
  /// sigma_pred / sigma_true for the simulation forecaster
  double shrink = 1.0;
  /// sd of the random mean bias, in forecast-sd units
  double bias_scale = 1.0;
  /// constant mean bias, in forecast-sd units
  double bias_offset = 0.0;

  void validate() const;
};

const char* to_string(ForecasterKind k);
ForecasterKind forecaster_kind_from(const std::string& s);

PredictiveDistribution rolling_empirical(const std::vector<double>& window,
                                         const std::vector<double>& levels = default_levels());

PredictiveDistribution ewma_parametric(const std::vector<double>& window, const ForecasterConfig& cfg,
                                       const std::vector<double>& levels = default_levels());

/// Gaussian forecast centred at signal + (bias_offset + bias_scale * eps) * sd_pred, sd_pred = shrink * true_sd.
PredictiveDistribution overconfident_sim(double true_sd, const ForecasterConfig& cfg, CounterRng& rng,
                                         double signal = 0.0,
                                         const std::vector<double>& levels = default_levels());

/// Type-7 sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p);

}  // namespace uwc
