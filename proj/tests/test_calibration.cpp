#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "uwc/calibration.hpp"
#include "uwc/rng.hpp"

namespace uwc {
namespace {

PredictiveDistribution normal_dist(double loc, double scale) {
  return location_scale(loc, scale, [](double p) { return normal_quantile(p); });
}

// Isotonic regression by enumerating every partition into contiguous blocks.
std::vector<double> brute_isotonic(const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = y.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_fit;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<double> fit(n);
    std::size_t start = 0;
    double prev = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      bool cut = i == n - 1 || (mask >> i) & 1u;
      if (!cut) continue;
      double sw = 0.0, sy = 0.0;
      for (std::size_t k = start; k <= i; ++k) {
        sw += w[k];
        sy += w[k] * y[k];
      }
      double m = sy / sw;
      if (m < prev - 1e-12) ok = false;
      prev = m;
      for (std::size_t k = start; k <= i; ++k) fit[k] = m;
      start = i + 1;
    }
    if (!ok) continue;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) sse += w[k] * (y[k] - fit[k]) * (y[k] - fit[k]);
    if (sse < best - 1e-15) {
      best = sse;
      best_fit = fit;
    }
  }
  return best_fit;
}

double max_reliability_gap(const std::vector<double>& p, const std::vector<int>& o, int bins = 10) {
  std::vector<double> sp(bins, 0.0), so(bins, 0.0), n(bins, 0.0);
  for (std::size_t t = 0; t < p.size(); ++t) {
    int b = std::min(bins - 1, static_cast<int>(p[t] * bins));
    sp[b] += p[t];
    so[b] += o[t];
    n[b] += 1.0;
  }
  double gap = 0.0;
  for (int b = 0; b < bins; ++b)
    if (n[b] >= 50) gap = std::max(gap, std::abs(sp[b] - so[b]) / n[b]);
  return gap;
}

struct Panel {
  std::vector<PredictiveDistribution> dists;
  std::vector<double> ys;
};

Panel gaussian_panel(std::size_t T, double sd_ratio, std::uint64_t seed) {
  CounterRng rng(seed, "calibration-panel");
  Panel p;
  for (std::size_t t = 0; t < T; ++t) {
    double mu = 0.01 * rng.normal();
    p.dists.push_back(normal_dist(mu, sd_ratio * 0.02));
    p.ys.push_back(mu + 0.02 * rng.normal());
  }
  return p;
}

WeightPanel ones(std::size_t T, std::size_t m) { return WeightPanel(T, std::vector<double>(m, 1.0)); }

}  // namespace

TEST(MonotoneMapTest, EvalAndInverse) {
  MonotoneMap m{{0.0, 0.5, 1.0}, {0.0, 0.8, 1.0}};
  EXPECT_DOUBLE_EQ(m(0.25), 0.4);
  EXPECT_DOUBLE_EQ(m(0.75), 0.9);
  EXPECT_DOUBLE_EQ(m.inverse(0.4), 0.25);
  EXPECT_DOUBLE_EQ(m.inverse(0.9), 0.75);
  EXPECT_FALSE(m.is_identity());
}

TEST(Platt, CalibratedSampleIsNearIdentity) {
  CounterRng rng(21, "platt");
  std::vector<double> p;
  std::vector<int> o;
  for (int t = 0; t < 50000; ++t) {
    double q = 0.02 + 0.96 * rng.uniform();
    p.push_back(q);
    o.push_back(rng.uniform() < q ? 1 : 0);
  }
  auto m = platt_fit(p, o);
  EXPECT_NEAR(m.a, 0.0, 0.05);
  EXPECT_NEAR(m.b, -1.0, 0.05);
  EXPECT_NEAR(platt_apply(m, 0.3), 0.3, 0.02);
}

TEST(Platt, SquaredMiscalibrationReducedOutOfSample) {
  CounterRng rng(22, "platt-sq");
  std::vector<double> p1, p2;
  std::vector<int> o1, o2;
  for (int t = 0; t < 40000; ++t) {
    double q = 0.02 + 0.96 * rng.uniform();
    int y = rng.uniform() < q * q ? 1 : 0;
    (t % 2 ? p2 : p1).push_back(q);
    (t % 2 ? o2 : o1).push_back(y);
  }
  auto m = platt_fit(p1, o1);
  std::vector<double> cal;
  for (double q : p2) cal.push_back(platt_apply(m, q));
  double before = max_reliability_gap(p2, o2), after = max_reliability_gap(cal, o2);
  EXPECT_LE(after, 0.5 * before) << before << " -> " << after;
}

TEST(Platt, ConstantHalfStaysHalf) {
  std::vector<double> p(1000, 0.5);
  std::vector<int> o(1000);
  for (std::size_t t = 0; t < o.size(); ++t) o[t] = static_cast<int>(t % 2);
  auto m = platt_fit(p, o);
  EXPECT_NEAR(platt_apply(m, 0.5), 0.5, 0.02);
}

TEST(Platt, SingleClassThrows) {
  std::vector<double> p(50, 0.3);
  std::vector<int> o(50, 1);
  EXPECT_THROW(platt_fit(p, o), std::invalid_argument);
}

TEST(Pav, MonotoneInputUnchanged) {
  std::vector<double> y{0.1, 0.2, 0.2, 0.7};
  EXPECT_EQ(pav(y), y);
}

TEST(Pav, MatchesBruteForceUpToLengthEight) {
  CounterRng rng(23, "pav");
  for (std::size_t n = 1; n <= 8; ++n)
    for (int rep = 0; rep < 300; ++rep) {
      std::vector<double> y(n), w(n);
      for (std::size_t i = 0; i < n; ++i) {
        // coarse values create ties
        y[i] = rep % 3 == 0 ? static_cast<double>(rng.below(4)) : rng.normal();
        w[i] = rep % 2 == 0 ? 1.0 : 0.1 + rng.uniform();
      }
      auto got = pav(y, w);
      auto want = brute_isotonic(y, w);
      for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(got[i], want[i], 1e-12) << "n=" << n << " rep=" << rep;
    }
}

TEST(Isotonic, TwoPointPooling) {
  auto m = isotonic_fit({0.2, 0.8}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(m(0.2), 0.5);
  EXPECT_DOUBLE_EQ(m(0.8), 0.5);
}

TEST(Isotonic, OutputNonDecreasing) {
  CounterRng rng(24, "iso");
  std::vector<double> p, o;
  for (int t = 0; t < 500; ++t) {
    p.push_back(rng.uniform());
    o.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
  }
  auto m = isotonic_fit(p, o);
  for (std::size_t k = 1; k < m.value.size(); ++k) EXPECT_GE(m.value[k], m.value[k - 1]);
}

TEST(QuantileRecal, NominalHitRatesGiveIdentity) {
  const auto& lv = default_levels();
  auto m = quantile_recalibrate(lv, lv);
  for (double a : lv) EXPECT_NEAR(m(a), a, 1e-12);
}

TEST(QuantileRecal, UniformUnderCoverageShiftsUp) {
  std::vector<double> lv, hit;
  for (double a : default_levels())
    if (a >= 0.05) {
      lv.push_back(a);
      hit.push_back(a - 0.05);
    }
  auto m = quantile_recalibrate(lv, hit);
  MonotoneMap coverage{lv, hit};
  for (double a : lv) {
    if (a > 0.94) break;
    EXPECT_GT(m(a), a);
    EXPECT_NEAR(coverage(m(a)), a, 1e-12);
  }
}

TEST(QuantileRecal, SampledUnderCoverageInSample) {
  const std::size_t T = 20000;
  CounterRng rng(25, "recal");
  std::vector<double> pits(T);
  for (auto& u : pits) u = std::min(rng.uniform() + 0.05, 1.0);
  const auto& lv = default_levels();
  std::vector<double> hit(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i)
    hit[i] = static_cast<double>(std::count_if(pits.begin(), pits.end(), [&](double u) { return u <= lv[i]; })) / T;
  auto m = quantile_recalibrate(lv, hit);
  for (std::size_t i = 5; i < 90; i += 5) {
    double a = lv[i];
    double cov = static_cast<double>(std::count_if(pits.begin(), pits.end(), [&](double u) { return u <= m(a); })) / T;
    EXPECT_NEAR(cov, a, 3.0 / std::sqrt(static_cast<double>(T))) << a;
  }
}

TEST(QuantileRecal, CrossingInputStillMonotone) {
  std::vector<double> lv{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> hit{0.2, 0.1, 0.6, 0.4, 0.95};
  auto m = quantile_recalibrate(lv, hit);
  for (std::size_t k = 1; k < m.calibrated.size(); ++k) EXPECT_GE(m.calibrated[k], m.calibrated[k - 1]);
  auto d = apply_level_map(m, normal_dist(0.0, 1.0));
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_GE(d.values()[k], d.values()[k - 1]);
}

TEST(PitRemap, UniformPitsNearIdentity) {
  const std::size_t T = 5000;
  CounterRng rng(26, "pit-uniform");
  std::vector<double> pits(T);
  for (auto& u : pits) u = rng.uniform();
  auto m = pit_remap_fit(pits);
  double gap = 0.0;
  for (int k = 0; k <= 1000; ++k) gap = std::max(gap, std::abs(m(k / 1000.0) - k / 1000.0));
  EXPECT_LE(gap, 2.0 / std::sqrt(static_cast<double>(T)));
}

TEST(PitRemap, UnderDispersedKsHalvedOutOfSample) {
  auto train = gaussian_panel(5000, 0.5, 27);
  auto test = gaussian_panel(5000, 0.5, 28);
  std::vector<double> p1, raw, remapped;
  for (std::size_t t = 0; t < train.ys.size(); ++t) p1.push_back(pit(train.dists[t], train.ys[t]));
  auto m = pit_remap_fit(p1);
  for (std::size_t t = 0; t < test.ys.size(); ++t) {
    raw.push_back(pit(test.dists[t], test.ys[t]));
    remapped.push_back(m(raw.back()));
  }
  // the grid clamps PITs to [0.01, 0.99]; compare on the same footing
  double before = ks_uniform(raw), after = ks_uniform(remapped);
  EXPECT_LE(after, 0.5 * before) << before << " -> " << after;
}

TEST(PitRemap, TooFewThrows) { EXPECT_THROW(pit_remap_fit(std::vector<double>(10, 0.5)), std::invalid_argument); }

TEST(Warp, IdentityRoundTripsExactly) {
  auto d = normal_dist(0.001, 0.02);
  auto out = warp_apply(identity_warp(), d);
  EXPECT_EQ(out.values(), d.values());
}

TEST(Warp, MedianByPiecewiseLinearInversion) {
  CalibrationWarp w;
  w.theta = {0.0, 0.5, 0.75, 0.9, 1.0};
  auto d = normal_dist(0.0, 1.0);
  auto out = warp_apply(w, d);
  EXPECT_NEAR(quantile_eval(out, 0.5), quantile_eval(d, 0.25), 1e-12);
}

TEST(Warp, ValidateRejects) {
  CalibrationWarp w;
  w.theta = {0.0, 0.5, 0.4, 0.9, 1.0};
  EXPECT_THROW(w.validate(), std::invalid_argument);
  w.theta = {0.1, 0.25, 0.5, 0.75, 1.0};
  EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(Criterion, ExactOutcomesWithinClt) {
  const std::size_t T = 50000;
  CounterRng rng(29, "criterion");
  std::vector<PredictiveDistribution> ds;
  std::vector<double> ys;
  for (std::size_t t = 0; t < T; ++t) {
    double mu = 0.01 * rng.normal(), sd = 0.01 + 0.02 * rng.uniform();
    ds.push_back(normal_dist(mu, sd));
    ys.push_back(mu + sd * rng.normal());
  }
  DiagnosticGrid g;
  EXPECT_LE(uwc_criterion(ds, ys, ones(T, g.size()), g), 5.0 * static_cast<double>(g.size()) / T);
}

TEST(Criterion, ZeroWeightsGiveZero) {
  auto p = gaussian_panel(300, 0.5, 30);
  DiagnosticGrid g;
  WeightPanel z(300, std::vector<double>(g.size(), 0.0));
  EXPECT_EQ(uwc_criterion(p.dists, p.ys, z, g), 0.0);
}

TEST(Criterion, UnderCoverageAtNinety) {
  const std::size_t T = 20000;
  CounterRng rng(31, "undercov");
  auto d = normal_dist(0.0, 1.0);
  std::vector<PredictiveDistribution> ds(T, d);
  std::vector<double> ys(T);
  // Y <= q90 with probability 0.8
  double q90 = quantile_eval(d, 0.9);
  for (auto& y : ys) y = rng.uniform() < 0.8 ? q90 - 1.0 : q90 + 1.0;
  DiagnosticGrid g;
  g.points = {0.9};
  EXPECT_GE(uwc_criterion(ds, ys, ones(T, 1), g), 0.01 - 3.0 * 0.2 * 0.004);
}

TEST(UwcFitTest, CalibratedWindowStaysNearIdentity) {
  auto p = gaussian_panel(5000, 1.0, 32);
  DiagnosticGrid g;
  auto fit = uwc_fit(p.dists, p.ys, ones(p.ys.size(), g.size()), g);
  auto id = identity_warp();
  for (std::size_t k = 0; k < id.theta.size(); ++k) EXPECT_NEAR(fit.warp.theta[k], id.theta[k], 0.02);
}

TEST(UwcFitTest, UnderDispersedWidensAndReducesCriterion) {
  auto p = gaussian_panel(5000, 0.5, 33);
  DiagnosticGrid g;
  auto w = ones(p.ys.size(), g.size());
  auto fit = uwc_fit(p.dists, p.ys, w, g);
  EXPECT_LE(fit.objective, fit.identity_objective);
  // quantile-space map g^{-1} is steep through the middle: the interquartile range widens
  auto d = p.dists.front();
  auto out = warp_apply(fit.warp, d);
  double iqr_in = quantile_eval(d, 0.75) - quantile_eval(d, 0.25);
  double iqr_out = quantile_eval(out, 0.75) - quantile_eval(out, 0.25);
  EXPECT_GT(iqr_out, 1.3 * iqr_in);
  std::vector<PredictiveDistribution> warped;
  for (const auto& x : p.dists) warped.push_back(warp_apply(fit.warp, x));
  double before = uwc_criterion(p.dists, p.ys, w, g), after = uwc_criterion(warped, p.ys, w, g);
  // grid clamping at the 1% and 99% levels caps what any warp can reach here
  EXPECT_LE(after, 0.5 * before) << before << " -> " << after;
}

TEST(UwcFitTest, NoWorseThanExhaustiveGrid) {
  auto p = gaussian_panel(1000, 0.7, 39);
  DiagnosticGrid g;
  auto w = ones(p.ys.size(), g.size());
  auto fit = uwc_fit(p.dists, p.ys, w, g);
  EXPECT_NEAR(fit.objective, uwc_objective(fit.warp.theta, p.dists, p.ys, w, g, 1e-4), 1e-15);
  double best = std::numeric_limits<double>::infinity();
  const int n = 16;
  for (int a = 0; a <= n; ++a)
    for (int b = a; b <= n; ++b)
      for (int c = b; c <= n; ++c)
        best = std::min(best, uwc_objective({0.0, double(a) / n, double(b) / n, double(c) / n, 1.0}, p.dists,
                                            p.ys, w, g, 1e-4));
  EXPECT_LE(fit.objective, best + 1e-12);
}

TEST(UwcFitTest, HugePenaltyPinsIdentity) {
  auto p = gaussian_panel(2000, 0.5, 34);
  DiagnosticGrid g;
  UwcOptions o;
  o.lambda = 1e6;
  auto fit = uwc_fit(p.dists, p.ys, ones(p.ys.size(), g.size()), g, o);
  auto id = identity_warp();
  for (std::size_t k = 0; k < id.theta.size(); ++k) EXPECT_NEAR(fit.warp.theta[k], id.theta[k], 1e-3);
}

TEST(UwcFitTest, ZeroWeightsReturnIdentity) {
  auto p = gaussian_panel(500, 0.5, 35);
  DiagnosticGrid g;
  WeightPanel z(500, std::vector<double>(g.size(), 0.0));
  auto fit = uwc_fit(p.dists, p.ys, z, g);
  EXPECT_EQ(fit.warp.theta, identity_warp().theta);
}

TEST(UwcFitTest, RejectsBadInputs) {
  auto p = gaussian_panel(100, 0.5, 36);
  DiagnosticGrid g;
  EXPECT_THROW(uwc_fit(p.dists, p.ys, ones(100, g.size()), g), std::invalid_argument);
  auto q = gaussian_panel(300, 0.5, 37);
  auto w = ones(300, g.size());
  w[3][2] = -1.0;
  EXPECT_THROW(uwc_fit(q.dists, q.ys, w, g), std::invalid_argument);
}

TEST(UwcFitTest, MeanOneScalingInvariance) {
  auto p = gaussian_panel(1000, 0.5, 38);
  DiagnosticGrid g;
  auto w1 = ones(1000, g.size());
  auto w2 = w1;
  for (auto& r : w2)
    for (auto& v : r) v = 7.0;
  EXPECT_EQ(uwc_fit(p.dists, p.ys, w1, g).warp.theta, uwc_fit(p.dists, p.ys, w2, g).warp.theta);
}

}  // namespace uwc
