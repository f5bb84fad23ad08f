#pragma once

#include <vector>

#include <Eigen/Dense>

#include "uwc/distribution.hpp"

namespace uwc {

enum class GridKind { quantile_levels, thresholds, pit_bins };

struct DiagnosticGrid {
  GridKind kind = GridKind::quantile_levels;
  std::vector<double> points{0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95};

  void validate() const;
  std::size_t size() const { return points.size(); }
};

/// First-order responses of (mean, variance) to removing quadrature mass at each grid level.
struct Influence {
  std::vector<double> a;
  std::vector<double> B;
  bool degenerate = false;
};

Influence influence_coeffs(const PredictiveDistribution& dist, const DiagnosticGrid& grid);

enum class KappaProfile { constant, tail_boost };

/// kappa_t(u): kappa_t everywhere, or doubled for u <= 0.1 and u >= 0.9.
std::vector<double> kappa_profile(double kappa_t, const DiagnosticGrid& grid, KappaProfile profile);

struct WeightSpec {
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::MatrixXd> B;
  std::vector<double> kappa;
  std::vector<double> weights;
};

/// omega(u) = |w' a(u) - gamma/2 <w w', B(u)>| * kappa(u)
WeightSpec compute_weights(const Eigen::VectorXd& w_star, double gamma, const std::vector<Eigen::VectorXd>& a,
                           const std::vector<Eigen::MatrixXd>& B, const std::vector<double>& kappa);

/// Single-asset form.
WeightSpec compute_weights(double w_star, double gamma, const Influence& inf, const std::vector<double>& kappa);

}  // namespace uwc
