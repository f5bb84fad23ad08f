#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "uwc/forecasters.hpp"

namespace uwc {

TEST(RollingEmpirical, ConstantWindowIsDegenerate) {
  auto d = rolling_empirical(std::vector<double>(100, 0.004));
  EXPECT_EQ(d.sd(), 0.0);
  EXPECT_DOUBLE_EQ(d.mean(), 0.004);
  for (double v : d.values()) EXPECT_EQ(v, 0.004);
}

TEST(RollingEmpirical, OrderStatisticMedian) {
  std::vector<double> w;
  for (int i = 100; i >= 1; --i) w.push_back(i / 100.0);
  auto d = rolling_empirical(w);
  // type-7: h = 99 * 0.5 = 49.5, halfway between 0.50 and 0.51
  EXPECT_NEAR(quantile_eval(d, 0.5), 0.505, 1e-12);
  EXPECT_NEAR(d.values().front(), 0.01 + 0.99 * 0.01, 1e-12);
}

TEST(RollingEmpirical, ShortWindowThrows) {
  EXPECT_THROW(rolling_empirical(std::vector<double>(49, 0.0)), std::invalid_argument);
}

TEST(Ewma, GaussianSigmaWithinTenPercent) {
  CounterRng rng(41, "ewma");
  std::vector<double> w(10000);
  for (auto& r : w) r = 0.02 * rng.normal();
  ForecasterConfig cfg;
  cfg.window = w.size();
  auto d = ewma_parametric(w, cfg);
  EXPECT_NEAR(d.sd(), 0.02, 0.002);
  double sigma = (quantile_eval(d, 0.84) - quantile_eval(d, 0.16)) / (2.0 * normal_quantile(0.84));
  EXPECT_NEAR(sigma, 0.02, 0.002);
}

TEST(Ewma, ZeroVarianceIsDegenerate) {
  ForecasterConfig cfg;
  auto d = ewma_parametric(std::vector<double>(60, 0.0), cfg);
  EXPECT_EQ(d.sd(), 0.0);
}

TEST(Ewma, StudentTQuantileRatio) {
  ForecasterConfig cfg;
  cfg.innovation = Innovation::student_t;
  cfg.nu = 5.0;
  std::vector<double> w(200);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = i % 2 ? 0.01 : -0.01;
  auto d = ewma_parametric(w, cfg);
  double sigma = 0.01;
  EXPECT_NEAR((quantile_eval(d, 0.95) - d.values()[49]) / sigma, 2.015, 1e-3);
}

TEST(Ewma, RecentShockRaisesSigma) {
  ForecasterConfig cfg;
  std::vector<double> w(200, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = i % 2 ? 0.01 : -0.01;
  auto calm = ewma_parametric(w, cfg);
  w.back() = 0.1;
  auto shocked = ewma_parametric(w, cfg);
  EXPECT_GT(shocked.sd(), calm.sd());
}

TEST(OverconfidentSim, HonestIsTrueLaw) {
  ForecasterConfig cfg;
  cfg.kind = ForecasterKind::overconfident_sim;
  cfg.shrink = 1.0;
  cfg.bias_scale = 0.0;
  CounterRng rng(42, "sim");
  auto d = overconfident_sim(0.02, cfg, rng);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_NEAR(d.values()[i], 0.02 * normal_quantile(d.levels()[i]), 1e-15);
}

TEST(OverconfidentSim, ShrinkHalvesSd) {
  ForecasterConfig cfg;
  cfg.kind = ForecasterKind::overconfident_sim;
  cfg.shrink = 0.5;
  cfg.bias_scale = 0.0;
  CounterRng rng(43, "sim");
  auto d = overconfident_sim(0.02, cfg, rng);
  double sd = (d.values()[83] - d.values()[15]) / (2.0 * normal_quantile(0.84));
  EXPECT_NEAR(sd, 0.01, 1e-12);
}

TEST(OverconfidentSim, PanelIsDetectablyUnderDispersed) {
  ForecasterConfig cfg;
  cfg.kind = ForecasterKind::overconfident_sim;
  cfg.shrink = 0.5;
  CounterRng frng(44, "forecaster");
  CounterRng yrng(44, "outcome");
  std::vector<double> pits;
  for (int t = 0; t < 5000; ++t) {
    auto d = overconfident_sim(0.02, cfg, frng);
    pits.push_back(pit(d, 0.02 * yrng.normal()));
  }
  EXPECT_GT(ks_uniform(pits), 0.1);
}

TEST(OverconfidentSim, BiasOffsetMovesMean) {
  ForecasterConfig cfg;
  cfg.kind = ForecasterKind::overconfident_sim;
  cfg.shrink = 0.5;
  cfg.bias_scale = 0.0;
  cfg.bias_offset = 0.5;
  CounterRng rng(45, "sim");
  auto d = overconfident_sim(0.02, cfg, rng, 0.001);
  EXPECT_NEAR(quantile_eval(d, 0.5), 0.001 + 0.5 * 0.01, 1e-15);
}

TEST(Config, Validation) {
  ForecasterConfig cfg;
  cfg.window = 10;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ForecasterConfig{};
  cfg.shrink = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ForecasterConfig{};
  cfg.innovation = Innovation::student_t;
  cfg.nu = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(forecaster_kind_from("ewma_parametric"), ForecasterKind::ewma_parametric);
  EXPECT_THROW(forecaster_kind_from("oracle"), std::invalid_argument);
}

}  // namespace uwc
