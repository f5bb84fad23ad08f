#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace uwc {

/// Quantile-grid predictive distribution. Immutable after construction.
class PredictiveDistribution {
 public:
  PredictiveDistribution(std::vector<double> levels, std::vector<double> values);

  const std::vector<double>& levels() const { return levels_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return levels_.size(); }

  double mean() const { return mean_; }
  double sd() const { return sd_; }

  /// Same grid, values shifted by c.
  PredictiveDistribution shifted(double c) const;

 private:
  std::vector<double> levels_;
  std::vector<double> values_;
  double mean_ = 0.0;
  double sd_ = 0.0;
};

/// {0.01, 0.02, ..., 0.99}
const std::vector<double>& default_levels();

/// Distribution with values loc + scale * z(level) for a standardized quantile function z.
template <class Z>
PredictiveDistribution location_scale(double loc, double scale, Z&& z,
                                      const std::vector<double>& levels = default_levels()) {
  std::vector<double> v(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) v[i] = loc + scale * z(levels[i]);
  return PredictiveDistribution(levels, std::move(v));
}

double cdf_eval(const PredictiveDistribution& dist, double y);
double quantile_eval(const PredictiveDistribution& dist, double alpha);

struct Moments {
  double mean;
  double sd;
};
Moments moments(const PredictiveDistribution& dist);
Moments moments(const std::vector<double>& levels, const std::vector<double>& values);

inline double pit(const PredictiveDistribution& dist, double y) { return cdf_eval(dist, y); }

/// Trapezoid weight of each level in the flat-extended integral over [0,1].
std::vector<double> trapezoid_weights(const std::vector<double>& levels);

/// Standard normal and Student-t quantiles.
double normal_quantile(double p);
double normal_cdf(double x);
double student_t_quantile(double p, double nu);

/// Kolmogorov-Smirnov distance of a sample against Uniform(0,1).
double ks_uniform(std::vector<double> sample);

class CovarianceEstimate {
 public:
  CovarianceEstimate(Eigen::MatrixXd sample, double shrinkage = 0.0);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double shrinkage() const { return shrinkage_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  Eigen::MatrixXd matrix_;
  double shrinkage_;
};

struct MarketObservation {
  std::int64_t timestamp = 0;
  double realized_return = 0.0;
  double volatility = 0.0;
  double spread = 0.0;
  double volume = 1.0;
};

void validate(const MarketObservation& obs);

}  // namespace uwc
