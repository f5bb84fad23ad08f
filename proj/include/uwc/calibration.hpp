#pragma once

#include <string>
#include <vector>

#include "uwc/distribution.hpp"
#include "uwc/utility_weights.hpp"

namespace uwc {

/// Non-decreasing piecewise-linear map on [0,1] through (x_k, y_k).
struct MonotoneMap {
  std::vector<double> x;
  std::vector<double> y;

  double operator()(double p) const;
  /// Generalised inverse: smallest p with map(p) >= q.
  double inverse(double q) const;
  bool is_identity() const;
};

/// Quantiles of g o F on the same level grid: F^{-1}(g^{-1}(alpha)).
PredictiveDistribution compose_cdf_map(const MonotoneMap& g, const PredictiveDistribution& dist);

/// Quantile evaluation clamped to the grid, accepting alpha in [0,1].
double quantile_clamped(const PredictiveDistribution& dist, double alpha);

// ---- Platt ----
struct PlattMap {
  double a = 0.0;
  double b = -1.0;
  int iterations = 0;
};
PlattMap platt_fit(const std::vector<double>& probs, const std::vector<int>& outcomes);
double platt_apply(const PlattMap& m, double p);

// ---- isotonic ----
/// Pool-adjacent-violators on y with weights w (ordered input). Returns fitted values.
std::vector<double> pav(const std::vector<double>& y, const std::vector<double>& w = {});

struct IsotonicMap {
  std::vector<double> x;  // sorted distinct inputs
  std::vector<double> value;
  double operator()(double p) const;
};
IsotonicMap isotonic_fit(const std::vector<double>& probs, const std::vector<double>& outcomes);

// ---- quantile recalibration ----
struct LevelMap {
  std::vector<double> nominal;
  std::vector<double> calibrated;
  double operator()(double alpha) const;
};
/// hit_rates[i] = empirical coverage of the nominal level levels[i].
LevelMap quantile_recalibrate(const std::vector<double>& levels, const std::vector<double>& hit_rates);
PredictiveDistribution apply_level_map(const LevelMap& m, const PredictiveDistribution& dist);

// ---- PIT remapping ----
MonotoneMap pit_remap_fit(const std::vector<double>& past_pits);

// ---- utility-weighted warp ----
struct CalibrationWarp {
  std::vector<double> knots{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> theta{0.0, 0.25, 0.5, 0.75, 1.0};
  double penalty_lambda = 1e-4;
  DiagnosticGrid grid;
  std::int64_t fitted_from = 0;
  std::int64_t fitted_to = 0;

  void validate() const;
  MonotoneMap map() const { return {knots, theta}; }
  double operator()(double p) const { return map()(p); }
};

CalibrationWarp identity_warp(const DiagnosticGrid& grid = {}, double lambda = 1e-4);
PredictiveDistribution warp_apply(const CalibrationWarp& warp, const PredictiveDistribution& dist);

/// One weight vector (over the grid) per observation.
using WeightPanel = std::vector<std::vector<double>>;

double uwc_criterion(const std::vector<PredictiveDistribution>& dists, const std::vector<double>& ys,
                     const WeightPanel& weights, const DiagnosticGrid& grid);
/// Moment m_u(F, Y) for one grid point.
double calibration_moment(const PredictiveDistribution& dist, double y, double point, GridKind kind);

enum class WeightScaling { none, mean_one };

struct UwcOptions {
  double lambda = 1e-4;
  std::size_t min_window = 250;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;
  WeightScaling scaling = WeightScaling::mean_one;
  std::vector<double> bandwidths{0.05, 0.02, 0.01, 0.005};
};

struct UwcFit {
  CalibrationWarp warp;
  double objective = 0.0;
  double identity_objective = 0.0;
  int iterations = 0;
  bool converged = true;
  std::string warning;
};

/// Penalised weighted-moment objective for a given theta (indicator moments).
double uwc_objective(const std::vector<double>& theta, const std::vector<PredictiveDistribution>& dists,
                     const std::vector<double>& ys, const WeightPanel& weights, const DiagnosticGrid& grid,
                     double lambda);

WeightPanel scale_weights(const WeightPanel& weights, WeightScaling scaling);

UwcFit uwc_fit(const std::vector<PredictiveDistribution>& dists, const std::vector<double>& ys,
               const WeightPanel& weights, const DiagnosticGrid& grid, const UwcOptions& opts = {});

}  // namespace uwc
