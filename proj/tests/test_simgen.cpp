#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "uwc/inference.hpp"
#include "uwc/simgen.hpp"

namespace uwc {

TEST(Simgen, NoiseChasingMoments) {
  ScenarioSpec spec = ScenarioSpec::preset(ScenarioKind::noise_chasing);
  spec.length = 5000;
  spec.seed = 71;
  Scenario sc = generate(spec);
  std::vector<double> r;
  for (const auto& o : sc.market) r.push_back(o.realized_return);
  EXPECT_LE(std::abs(mean_of(r)), 3.0 * 0.02 / std::sqrt(5000.0));
  EXPECT_NEAR(sd_of(r) / 0.02, 1.0, 0.05);
  for (double s : sc.signal) EXPECT_EQ(s, 0.0);
}

TEST(Simgen, DegenerateChainConstantFriction) {
  ScenarioSpec spec = ScenarioSpec::preset(ScenarioKind::regime_switching);
  spec.stay = {1.0, 1.0};
  spec.start_state = 1;
  spec.volume_sigma = 0.0;
  spec.spread_noise = 0.0;
  spec.length = 500;
  Scenario sc = generate(spec);
  for (const auto& o : sc.market) {
    EXPECT_EQ(o.spread, sc.market.front().spread);
    EXPECT_EQ(o.volatility, sc.market.front().volatility);
    EXPECT_EQ(o.volume, sc.market.front().volume);
  }
  for (int g : sc.regime) EXPECT_EQ(g, 1);
}

TEST(Simgen, SameSeedBitwiseIdentical) {
  ScenarioSpec spec = ScenarioSpec::preset(ScenarioKind::signal_bearing);
  spec.length = 2000;
  spec.seed = 72;
  Scenario a = generate(spec), b = generate(spec);
  ASSERT_EQ(a.market.size(), b.market.size());
  for (std::size_t t = 0; t < a.market.size(); ++t) {
    EXPECT_EQ(std::memcmp(&a.market[t].realized_return, &b.market[t].realized_return, sizeof(double)), 0);
    EXPECT_EQ(a.market[t].spread, b.market[t].spread);
    EXPECT_EQ(a.signal[t], b.signal[t]);
  }
  spec.seed = 73;
  Scenario c = generate(spec);
  EXPECT_NE(a.market[10].realized_return, c.market[10].realized_return);
}

TEST(Simgen, RegimeSwitchingVisitsBothStates) {
  ScenarioSpec spec = ScenarioSpec::preset(ScenarioKind::regime_switching);
  spec.length = 5000;
  spec.seed = 74;
  Scenario sc = generate(spec);
  std::size_t high = 0;
  for (int g : sc.regime) high += g == 1;
  // stationary share of state 1: (1-0.98) / ((1-0.98) + (1-0.95))
  EXPECT_NEAR(static_cast<double>(high) / 5000.0, 0.02 / 0.07, 0.1);
  double v0 = 0, v1 = 0;
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t t = 0; t < sc.market.size(); ++t) {
    if (sc.regime[t]) {
      v1 += sc.market[t].spread;
      ++n1;
    } else {
      v0 += sc.market[t].spread;
      ++n0;
    }
  }
  EXPECT_GT(v1 / n1, v0 / n0);
}

TEST(Simgen, SignalBearingReturnsCorrelateWithSignal) {
  ScenarioSpec spec = ScenarioSpec::preset(ScenarioKind::signal_bearing);
  spec.length = 20000;
  spec.seed = 75;
  Scenario sc = generate(spec);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t t = 0; t < sc.market.size(); ++t) {
    double x = sc.signal[t] - spec.true_mean, y = sc.market[t].realized_return - spec.true_mean;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  // corr = s / sqrt(1 + s^2) with s = 0.2
  EXPECT_NEAR(sxy / std::sqrt(sxx * syy), 0.2 / std::sqrt(1.04), 0.03);
}

TEST(Simgen, TimestampsIncreaseAndObservationsValid) {
  ScenarioSpec spec = ScenarioSpec::preset(ScenarioKind::regime_switching);
  spec.length = 1000;
  Scenario sc = generate(spec);
  for (std::size_t t = 0; t < sc.market.size(); ++t) {
    EXPECT_NO_THROW(validate(sc.market[t]));
    if (t) EXPECT_GT(sc.market[t].timestamp, sc.market[t - 1].timestamp);
  }
}

TEST(Simgen, ValidationRejects) {
  ScenarioSpec spec;
  spec.true_sd = 0.0;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = ScenarioSpec{};
  spec.stay = {1.2, 1.0};
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = ScenarioSpec{};
  spec.signal_phi = 1.0;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  EXPECT_THROW(scenario_kind_from("bull_market"), std::invalid_argument);
}

}  // namespace uwc
