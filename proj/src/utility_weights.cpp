#include "uwc/utility_weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwc {

void DiagnosticGrid::validate() const {
  if (points.empty()) throw std::invalid_argument("DiagnosticGrid: empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i] > points[i - 1]))
      throw std::invalid_argument("DiagnosticGrid: points not strictly increasing");
    if (kind != GridKind::thresholds && !(points[i] > 0.0 && points[i] < 1.0))
      throw std::invalid_argument("DiagnosticGrid: level outside (0,1)");
  }
}

Influence influence_coeffs(const PredictiveDistribution& dist, const DiagnosticGrid& grid) {
  if (grid.kind != GridKind::quantile_levels)
    throw std::invalid_argument("influence_coeffs: requires a quantile-level grid");
  grid.validate();
  const auto& lv = dist.levels();
  auto wt = trapezoid_weights(lv);
  const double mu = dist.mean();
  const double var = dist.sd() * dist.sd();
  Influence out;
  out.degenerate = dist.sd() == 0.0;
  out.a.resize(grid.size());
  out.B.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double u = grid.points[j];
    double gap;
    if (u <= lv.front()) {
      gap = wt.front();
    } else if (u >= lv.back()) {
      gap = wt.back();
    } else {
      auto it = std::upper_bound(lv.begin(), lv.end(), u);
      std::size_t k = static_cast<std::size_t>(it - lv.begin()) - 1;
      double f = (u - lv[k]) / (lv[k + 1] - lv[k]);
      gap = wt[k] + f * (wt[k + 1] - wt[k]);
    }
    double dev = quantile_eval(dist, u) - mu;
    out.a[j] = out.degenerate ? 0.0 : -dev * gap;
    out.B[j] = out.degenerate ? 0.0 : -(dev * dev - var) * gap;
  }
  return out;
}

std::vector<double> kappa_profile(double kappa_t, const DiagnosticGrid& grid, KappaProfile profile) {
  std::vector<double> k(grid.size(), kappa_t);
  if (profile == KappaProfile::tail_boost)
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (grid.points[j] <= 0.1 || grid.points[j] >= 0.9) k[j] *= 2.0;
  return k;
}

WeightSpec compute_weights(const Eigen::VectorXd& w, double gamma, const std::vector<Eigen::VectorXd>& a,
                           const std::vector<Eigen::MatrixXd>& B, const std::vector<double>& kappa) {
  if (a.size() != B.size() || a.size() != kappa.size())
    throw std::invalid_argument("compute_weights: per-u inputs differ in length");
  WeightSpec ws{a, B, kappa, std::vector<double>(a.size())};
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].size() != w.size() || B[j].rows() != w.size() || B[j].cols() != w.size())
      throw std::invalid_argument("compute_weights: dimension mismatch");
    if (!(kappa[j] >= 0.0)) throw std::invalid_argument("compute_weights: negative kappa");
    double v = std::abs(w.dot(a[j]) - 0.5 * gamma * w.dot(B[j] * w)) * kappa[j];
    if (!std::isfinite(v)) throw std::domain_error("compute_weights: non-finite weight");
    ws.weights[j] = v;
  }
  return ws;
}

WeightSpec compute_weights(double w_star, double gamma, const Influence& inf, const std::vector<double>& kappa) {
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::MatrixXd> B;
  for (std::size_t j = 0; j < inf.a.size(); ++j) {
    a.push_back(Eigen::VectorXd::Constant(1, inf.a[j]));
    B.push_back(Eigen::MatrixXd::Constant(1, 1, inf.B[j]));
  }
  return compute_weights(Eigen::VectorXd::Constant(1, w_star), gamma, a, B, kappa);
}

}  // namespace uwc
