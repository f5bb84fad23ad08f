#include "uwc/governance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uwc {

void StressScenario::validate() const {
  if (!(cost_multiplier > 0.0) || !(vol_multiplier > 0.0))
    throw std::invalid_argument("StressScenario: multipliers must be positive");
  if (!std::isfinite(mean_shift_sd)) throw std::invalid_argument("StressScenario: mean shift must be finite");
}

std::vector<StressScenario> model_risk_set(double shift, double cost, double vol) {
  return {
      {"baseline", 0.0, 1.0, 1.0},
      {"mean_shift", shift, 1.0, 1.0},
      {"cost_increase", 0.0, cost, 1.0},
      {"volatility_shift", 0.0, 1.0, vol},
      {"combined", shift, cost, vol},
  };
}

double stress_multiplier(double stressed, double baseline) {
  if (stressed == baseline) return 1.0;
  if (baseline == 0.0)
    return stressed > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return stressed / baseline;
}

std::size_t worst_case(const std::vector<StressResult>& grid) {
  if (grid.empty()) throw std::invalid_argument("worst_case: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i].expected_loss > grid[best].expected_loss) best = i;
  return best;
}

DriftStatistic drift_monitor(const std::vector<double>& d, std::size_t window, double threshold,
                             std::size_t persistence) {
  if (window < 30) throw std::invalid_argument("drift_monitor: window must be >= 30");
  if (persistence == 0) throw std::invalid_argument("drift_monitor: persistence must be >= 1");
  DriftStatistic s;
  s.window = window;
  s.threshold = threshold;
  s.persistence = persistence;
  const std::size_t T = d.size();
  s.z.assign(T, std::numeric_limits<double>::quiet_NaN());
  s.defined.assign(T, false);
  s.in_breach.assign(T, false);
  if (T < window) return s;

  // recompute each window directly: rolling running sums drift at 1e-16 scale on long series
  std::size_t run = 0;
  std::size_t breaches = 0;
  for (std::size_t t = window - 1; t < T; ++t) {
    double m = 0.0;
    for (std::size_t k = t + 1 - window; k <= t; ++k) m += d[k];
    m /= static_cast<double>(window);
    double v = 0.0;
    for (std::size_t k = t + 1 - window; k <= t; ++k) v += (d[k] - m) * (d[k] - m);
    double sd = std::sqrt(v / static_cast<double>(window - 1));
    if (sd > 0.0) {
      s.z[t] = m / sd;
      s.defined[t] = true;
    }
    if (s.defined[t] && std::abs(s.z[t]) > threshold) {
      ++run;
      if (run == persistence) s.breach_events.push_back(t);
      if (run >= persistence) {
        s.in_breach[t] = true;
        ++breaches;
      }
    } else {
      run = 0;
    }
  }
  s.breach_frequency = static_cast<double>(breaches) / static_cast<double>(T);
  return s;
}

}  // namespace uwc
