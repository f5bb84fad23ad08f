#include "uwc/simgen.hpp"

#include <cmath>
#include <stdexcept>

#include "uwc/rng.hpp"

namespace uwc {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::noise_chasing:
      return "noise_chasing";
    case ScenarioKind::regime_switching:
      return "regime_switching";
    case ScenarioKind::signal_bearing:
      return "signal_bearing";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from(const std::string& s) {
  if (s == "noise_chasing") return ScenarioKind::noise_chasing;
  if (s == "regime_switching") return ScenarioKind::regime_switching;
  if (s == "signal_bearing") return ScenarioKind::signal_bearing;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

void ScenarioSpec::validate() const {
  if (length == 0) throw std::invalid_argument("ScenarioSpec: length must be positive");
  if (!(true_sd > 0.0)) throw std::invalid_argument("ScenarioSpec: true_sd must be positive");
  for (int r = 0; r < 2; ++r) {
    if (!(stay[r] >= 0.0 && stay[r] <= 1.0)) throw std::invalid_argument("ScenarioSpec: stay probability outside [0,1]");
    if (!(regimes[r].vol_mult > 0.0)) throw std::invalid_argument("ScenarioSpec: vol_mult must be positive");
    if (!(regimes[r].spread >= 0.0)) throw std::invalid_argument("ScenarioSpec: spread must be >= 0");
    if (!(regimes[r].volume_median > 0.0)) throw std::invalid_argument("ScenarioSpec: volume must be positive");
  }
  if (start_state != 0 && start_state != 1) throw std::invalid_argument("ScenarioSpec: start_state must be 0 or 1");
  if (!(volume_sigma >= 0.0) || !(spread_noise >= 0.0)) throw std::invalid_argument("ScenarioSpec: negative dispersion");
  if (!(signal_strength >= 0.0)) throw std::invalid_argument("ScenarioSpec: signal_strength < 0");
  if (!(signal_phi > -1.0 && signal_phi < 1.0)) throw std::invalid_argument("ScenarioSpec: signal_phi outside (-1,1)");
}

ScenarioSpec ScenarioSpec::preset(ScenarioKind kind) {
  ScenarioSpec s;
  s.kind = kind;
  if (kind == ScenarioKind::noise_chasing) return s;
  s.stay = {0.98, 0.95};
  s.regimes[0] = {1.0, 1e-4, 1.0};
  s.regimes[1] = {2.0, 3e-4, 0.5};
  s.volume_sigma = 0.3;
  s.spread_noise = 0.1;
  if (kind == ScenarioKind::signal_bearing) s.signal_strength = 0.2;
  return s;
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario sc;
  sc.spec = spec;
  const std::size_t T = spec.length;
  sc.market.resize(T);
  sc.signal.assign(T, 0.0);
  sc.true_sd.resize(T);
  sc.regime.resize(T);

  CounterRng regime_rng(spec.seed, "simgen/regime");
  CounterRng return_rng(spec.seed, "simgen/returns");
  CounterRng signal_rng(spec.seed, "simgen/signal");
  CounterRng spread_rng(spec.seed, "simgen/spread");
  CounterRng volume_rng(spec.seed, "simgen/volume");

  int state = spec.start_state;
  double z = 0.0;
  const double innov = std::sqrt(1.0 - spec.signal_phi * spec.signal_phi);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0 && spec.stay[state] < 1.0 && regime_rng.uniform() > spec.stay[state]) state = 1 - state;
    const RegimeLevels& lv = spec.regimes[state];
    double sd = spec.true_sd * lv.vol_mult;
    double sig = 0.0;
    if (spec.signal_strength > 0.0) {
      z = (t == 0) ? signal_rng.normal() : spec.signal_phi * z + innov * signal_rng.normal();
      sig = spec.signal_strength * sd * z;
    }
    MarketObservation& o = sc.market[t];
    o.timestamp = static_cast<std::int64_t>(t);
    o.realized_return = spec.true_mean + sig + sd * return_rng.normal();
    o.volatility = sd;
    o.spread = spec.spread_noise > 0.0 ? lv.spread * std::exp(spec.spread_noise * spread_rng.normal()) : lv.spread;
    o.volume = spec.volume_sigma > 0.0 ? lv.volume_median * std::exp(spec.volume_sigma * volume_rng.normal())
                                       : lv.volume_median;
    sc.signal[t] = spec.true_mean + sig;
    sc.true_sd[t] = sd;
    sc.regime[t] = state;
  }
  return sc;
}

}  // namespace uwc
