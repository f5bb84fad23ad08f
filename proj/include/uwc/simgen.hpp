#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uwc/distribution.hpp"

namespace uwc {

enum class ScenarioKind { noise_chasing, regime_switching, signal_bearing };
const char* to_string(ScenarioKind k);
ScenarioKind scenario_kind_from(const std::string& s);

struct RegimeLevels {
  double vol_mult = 1.0;
  double spread = 2e-4;
  double volume_median = 1.0;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::noise_chasing;
  std::size_t length = 5000;
  double true_mean = 0.0;
  double true_sd = 0.02;
  /// P(stay) in each of the two regimes.
  std::array<double, 2> stay{1.0, 1.0};
  std::array<RegimeLevels, 2> regimes{};
  int start_state = 0;
  /// lognormal dispersion of volume and of the spread around its regime level
  double volume_sigma = 0.0;
  double spread_noise = 0.0;
  /// predictable component: strength * sigma_t * z_t with z a unit-variance AR(1)
  double signal_strength = 0.0;
  double signal_phi = 0.9;
  std::uint64_t seed = 1;

  void validate() const;
  /// Defaults for each kind.
  static ScenarioSpec preset(ScenarioKind kind);
};

struct Scenario {
  ScenarioSpec spec;
  std::vector<MarketObservation> market;
  /// latent quantities known to the simulation forecaster at each t
  std::vector<double> signal;
  std::vector<double> true_sd;
  std::vector<int> regime;
};

Scenario generate(const ScenarioSpec& spec);

}  // namespace uwc
