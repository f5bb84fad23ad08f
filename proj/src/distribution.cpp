#include "uwc/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace uwc {

PredictiveDistribution::PredictiveDistribution(std::vector<double> levels, std::vector<double> values)
    : levels_(std::move(levels)), values_(std::move(values)) {
  if (levels_.size() < 3) throw std::invalid_argument("PredictiveDistribution: need at least 3 levels");
  if (levels_.size() != values_.size())
    throw std::invalid_argument("PredictiveDistribution: levels and values differ in length");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!(levels_[i] > 0.0 && levels_[i] < 1.0))
      throw std::invalid_argument("PredictiveDistribution: level outside (0,1)");
    if (!std::isfinite(values_[i])) throw std::invalid_argument("PredictiveDistribution: non-finite value");
    if (i > 0 && !(levels_[i] > levels_[i - 1]))
      throw std::invalid_argument("PredictiveDistribution: levels not strictly increasing");
    if (i > 0 && values_[i] < values_[i - 1])
      throw std::invalid_argument("PredictiveDistribution: values decreasing at index " + std::to_string(i));
  }
  auto m = moments(levels_, values_);
  mean_ = m.mean;
  sd_ = m.sd;
}

PredictiveDistribution PredictiveDistribution::shifted(double c) const {
  std::vector<double> v(values_);
  for (auto& x : v) x += c;
  return PredictiveDistribution(levels_, std::move(v));
}

const std::vector<double>& default_levels() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(99);
    for (int i = 0; i < 99; ++i) g[i] = (i + 1) / 100.0;
    return g;
  }();
  return grid;
}

double cdf_eval(const PredictiveDistribution& dist, double y) {
  const auto& l = dist.levels();
  const auto& v = dist.values();
  if (y < v.front()) return l.front();
  // last index with v[k] <= y
  auto it = std::upper_bound(v.begin(), v.end(), y);
  std::size_t k = static_cast<std::size_t>(it - v.begin()) - 1;
  if (k + 1 >= v.size()) return l.back();
  double frac = (y - v[k]) / (v[k + 1] - v[k]);
  return l[k] + (l[k + 1] - l[k]) * frac;
}

double quantile_eval(const PredictiveDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("quantile_eval: alpha must lie in (0,1)");
  const auto& l = dist.levels();
  const auto& v = dist.values();
  if (alpha <= l.front()) return v.front();
  if (alpha >= l.back()) return v.back();
  auto it = std::upper_bound(l.begin(), l.end(), alpha);
  std::size_t k = static_cast<std::size_t>(it - l.begin()) - 1;
  if (alpha == l[k]) return v[k];
  double frac = (alpha - l[k]) / (l[k + 1] - l[k]);
  return v[k] + (v[k + 1] - v[k]) * frac;
}

std::vector<double> trapezoid_weights(const std::vector<double>& levels) {
  const std::size_t n = levels.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double left = (i == 0) ? levels[0] : 0.5 * (levels[i] - levels[i - 1]);
    double right = (i + 1 == n) ? 1.0 - levels[i] : 0.5 * (levels[i + 1] - levels[i]);
    w[i] = left + right;
  }
  return w;
}

Moments moments(const std::vector<double>& levels, const std::vector<double>& values) {
  if (std::all_of(values.begin(), values.end(), [&](double x) { return x == values.front(); }))
    return {values.front(), 0.0};
  auto w = trapezoid_weights(levels);
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += w[i] * values[i];
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) var += w[i] * (values[i] - mean) * (values[i] - mean);
  return {mean, std::sqrt(std::max(var, 0.0))};
}

Moments moments(const PredictiveDistribution& dist) { return {dist.mean(), dist.sd()}; }

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> n01;
  return boost::math::quantile(n01, p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double student_t_quantile(double p, double nu) {
  boost::math::students_t_distribution<double> t(nu);
  return boost::math::quantile(t, p);
}

double ks_uniform(std::vector<double> s) {
  if (s.empty()) throw std::invalid_argument("ks_uniform: empty sample");
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    d = std::max(d, (i + 1) / n - s[i]);
    d = std::max(d, s[i] - i / n);
  }
  return d;
}

CovarianceEstimate::CovarianceEstimate(Eigen::MatrixXd sample, double shrinkage) : shrinkage_(shrinkage) {
  if (sample.rows() != sample.cols() || sample.rows() == 0)
    throw std::invalid_argument("CovarianceEstimate: matrix must be square and non-empty");
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0))
    throw std::invalid_argument("CovarianceEstimate: shrinkage outside [0,1]");
  if (!sample.allFinite()) throw std::invalid_argument("CovarianceEstimate: non-finite entry");
  if ((sample - sample.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("CovarianceEstimate: matrix not symmetric within 1e-12");
  Eigen::MatrixXd sym = 0.5 * (sample + sample.transpose());
  Eigen::MatrixXd diag = sym.diagonal().asDiagonal();
  matrix_ = (1.0 - shrinkage) * sym + shrinkage * diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_, Eigen::EigenvaluesOnly);
  double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-12 * scale)
    throw std::invalid_argument("CovarianceEstimate: matrix not positive semidefinite");
}

void validate(const MarketObservation& o) {
  if (!std::isfinite(o.realized_return)) throw std::invalid_argument("MarketObservation: non-finite return");
  if (!(o.volatility >= 0.0)) throw std::invalid_argument("MarketObservation: volatility < 0");
  if (!(o.spread >= 0.0)) throw std::invalid_argument("MarketObservation: spread < 0");
  if (!(o.volume > 0.0)) throw std::invalid_argument("MarketObservation: volume <= 0");
}

}  // namespace uwc
