#include <gtest/gtest.h>

#include <cmath>

#include "uwc/governance.hpp"
#include "uwc/rng.hpp"

namespace uwc {
namespace {

std::vector<double> noise(std::size_t T, std::uint64_t seed) {
  CounterRng rng(seed, "drift-noise");
  std::vector<double> x(T);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST(Stress, ModelRiskSetComposition) {
  auto s = model_risk_set();
  ASSERT_EQ(s.size(), 5u);
  EXPECT_TRUE(s[0].is_identity());
  EXPECT_EQ(s[4].name, "combined");
  EXPECT_EQ(s[4].mean_shift_sd, s[1].mean_shift_sd);
  EXPECT_EQ(s[4].cost_multiplier, s[2].cost_multiplier);
  EXPECT_EQ(s[4].vol_multiplier, s[3].vol_multiplier);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_FALSE(s[i].is_identity());
}

TEST(Stress, Validation) {
  StressScenario s;
  s.cost_multiplier = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = StressScenario{};
  s.mean_shift_sd = NAN;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Stress, MultiplierRules) {
  EXPECT_EQ(stress_multiplier(0.003, 0.003), 1.0);
  EXPECT_EQ(stress_multiplier(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stress_multiplier(0.006, 0.003), 2.0);
  EXPECT_EQ(stress_multiplier(1e-4, 0.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(stress_multiplier(-1e-4, 0.0), -std::numeric_limits<double>::infinity());
}

TEST(Stress, WorstCase) {
  std::vector<StressResult> g(1);
  g[0].expected_loss = -0.01;
  EXPECT_EQ(worst_case(g), 0u);
  auto set = model_risk_set();
  std::vector<StressResult> grid;
  double losses[] = {0.001, 0.002, 0.003, 0.002, 0.003};
  for (std::size_t i = 0; i < set.size(); ++i) grid.push_back({set[i], losses[i], 0.001, losses[i] / 0.001});
  EXPECT_EQ(worst_case(grid), 2u);
  EXPECT_THROW(worst_case({}), std::invalid_argument);
}

TEST(Drift, ConstantZeroUndefinedNoBreach) {
  auto s = drift_monitor(std::vector<double>(2000, 0.0), 500);
  for (bool d : s.defined) EXPECT_FALSE(d);
  EXPECT_TRUE(s.breach_events.empty());
  EXPECT_EQ(s.breach_frequency, 0.0);
}

TEST(Drift, NullBreachFrequencySmall) {
  auto s = drift_monitor(noise(10000, 61), 500);
  EXPECT_LT(s.breach_frequency, 0.01);
}

TEST(Drift, LevelShiftDetectedWithinTwoWindows) {
  const std::size_t T = 6000, shift_at = 3000, window = 500;
  auto x = noise(T, 62);
  for (std::size_t t = shift_at; t < T; ++t) x[t] += 3.0;
  auto s = drift_monitor(x, window);
  ASSERT_FALSE(s.breach_events.empty());
  std::size_t first = 0;
  for (std::size_t e : s.breach_events)
    if (e >= shift_at) {
      first = e;
      break;
    }
  EXPECT_GE(first, shift_at);
  EXPECT_LE(first, shift_at + 2 * window);
}

TEST(Drift, ZMatchesDirectWindow) {
  auto x = noise(300, 63);
  for (auto& v : x) v += 0.1;
  auto s = drift_monitor(x, 50);
  for (std::size_t t : {49u, 120u, 299u}) {
    double m = 0.0, v = 0.0;
    for (std::size_t k = t - 49; k <= t; ++k) m += x[k];
    m /= 50;
    for (std::size_t k = t - 49; k <= t; ++k) v += (x[k] - m) * (x[k] - m);
    EXPECT_NEAR(s.z[t], m / std::sqrt(v / 49), 1e-12);
  }
  EXPECT_TRUE(std::isnan(s.z[48]));
}

TEST(Drift, PersistenceMatchesRunOracle) {
  auto x = noise(3000, 64);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += 0.3 * std::sin(t / 150.0);
  const std::size_t P = 5;
  auto s = drift_monitor(x, 40, 0.4, P);
  std::size_t run = 0, count = 0;
  std::vector<std::size_t> events;
  for (std::size_t t = 0; t < x.size(); ++t) {
    bool above = s.defined[t] && std::abs(s.z[t]) > 0.4;
    run = above ? run + 1 : 0;
    if (run == P) events.push_back(t);
    EXPECT_EQ(s.in_breach[t], run >= P) << t;
    count += run >= P;
  }
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(s.breach_events, events);
  EXPECT_DOUBLE_EQ(s.breach_frequency, static_cast<double>(count) / x.size());
}

TEST(Drift, Preconditions) {
  EXPECT_THROW(drift_monitor(std::vector<double>(100, 0.0), 29), std::invalid_argument);
  EXPECT_THROW(drift_monitor(std::vector<double>(100, 0.0), 30, 2.0, 0), std::invalid_argument);
}

}  // namespace uwc
