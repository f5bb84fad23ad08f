#include "uwc/forecasters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uwc {

namespace {
PredictiveDistribution gaussian(double mean, double sd, const std::vector<double>& levels) {
  static const std::vector<double> z_default = [] {
    std::vector<double> z;
    for (double p : default_levels()) z.push_back(normal_quantile(p));
    return z;
  }();
  if (levels == default_levels()) {
    std::vector<double> v(levels.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mean + sd * z_default[i];
    return PredictiveDistribution(levels, std::move(v));
  }
  return location_scale(mean, sd, normal_quantile, levels);
}
}  // namespace

void ForecasterConfig::validate() const {
  if (kind != ForecasterKind::overconfident_sim && window < 50)
    throw std::invalid_argument("ForecasterConfig: window must be >= 50");
  if (!(ewma_lambda > 0.0 && ewma_lambda < 1.0)) throw std::invalid_argument("ForecasterConfig: ewma_lambda outside (0,1)");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw std::invalid_argument("ForecasterConfig: shrink outside (0,1]");
  if (!(bias_scale >= 0.0)) throw std::invalid_argument("ForecasterConfig: bias_scale < 0");
  if (innovation == Innovation::student_t && !(nu > 2.0)) throw std::invalid_argument("ForecasterConfig: nu must be > 2");
}

const char* to_string(ForecasterKind k) {
  switch (k) {
    case ForecasterKind::rolling_empirical:
      return "rolling_empirical";
    case ForecasterKind::ewma_parametric:
      return "ewma_parametric";
    case ForecasterKind::overconfident_sim:
      return "overconfident_sim";
  }
  return "unknown";
}

ForecasterKind forecaster_kind_from(const std::string& s) {
  if (s == "rolling_empirical") return ForecasterKind::rolling_empirical;
  if (s == "ewma_parametric") return ForecasterKind::ewma_parametric;
  if (s == "overconfident_sim") return ForecasterKind::overconfident_sim;
  throw std::invalid_argument("unknown forecaster kind '" + s + "'");
}

double sorted_quantile(const std::vector<double>& x, double p) {
  double h = (static_cast<double>(x.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

PredictiveDistribution rolling_empirical(const std::vector<double>& window, const std::vector<double>& levels) {
  if (window.size() < 50) throw std::invalid_argument("rolling_empirical: window shorter than 50");
  std::vector<double> s(window);
  std::sort(s.begin(), s.end());
  std::vector<double> v(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) v[i] = sorted_quantile(s, levels[i]);
  return PredictiveDistribution(levels, std::move(v));
}

PredictiveDistribution ewma_parametric(const std::vector<double>& window, const ForecasterConfig& cfg,
                                       const std::vector<double>& levels) {
  if (window.size() < 50) throw std::invalid_argument("ewma_parametric: window shorter than 50");
  const double n = static_cast<double>(window.size());
  double mean = std::accumulate(window.begin(), window.end(), 0.0) / n;
  double var = 0.0;
  for (double r : window) var += r * r;
  var /= n;
  for (double r : window) var = cfg.ewma_lambda * var + (1.0 - cfg.ewma_lambda) * r * r;
  double sigma = std::sqrt(var);
  if (sigma == 0.0) return PredictiveDistribution(levels, std::vector<double>(levels.size(), mean));
  if (cfg.innovation == Innovation::student_t)
    return location_scale(mean, sigma, [&](double p) { return student_t_quantile(p, cfg.nu); }, levels);
  return gaussian(mean, sigma, levels);
}

PredictiveDistribution overconfident_sim(double true_sd, const ForecasterConfig& cfg, CounterRng& rng, double signal,
                                         const std::vector<double>& levels) {
  if (!(true_sd > 0.0)) throw std::invalid_argument("overconfident_sim: true_sd must be positive");
  double sd = cfg.shrink * true_sd;
  double eps = cfg.bias_scale > 0.0 ? rng.normal() : 0.0;
  double mean = signal + (cfg.bias_offset + cfg.bias_scale * eps) * sd;
  return gaussian(mean, sd, levels);
}

}  // namespace uwc
