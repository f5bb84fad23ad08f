#include <gtest/gtest.h>

#include <cmath>

#include "uwc/distribution.hpp"
#include "uwc/rng.hpp"

namespace uwc {
namespace {

PredictiveDistribution three_point() { return PredictiveDistribution({0.25, 0.5, 0.75}, {-1.0, 0.0, 1.0}); }

PredictiveDistribution standard_normal() { return location_scale(0.0, 1.0, normal_quantile); }

PredictiveDistribution random_dist(CounterRng& rng) {
  std::size_t n = 3 + rng.below(20);
  std::vector<double> l(n), v(n);
  double acc = 0.0, x = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    acc += 0.1 + rng.uniform();
    l[i] = acc;
    x += rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    v[i] = x;
  }
  for (auto& li : l) li /= acc + 0.5;
  return PredictiveDistribution(l, v);
}

}  // namespace

TEST(Distribution, RejectsInvalidGrids) {
  EXPECT_THROW(PredictiveDistribution({0.2, 0.5}, {0, 1}), std::invalid_argument);
  EXPECT_THROW(PredictiveDistribution({0.2, 0.5, 0.5}, {0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(PredictiveDistribution({0.0, 0.5, 0.7}, {0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(PredictiveDistribution({0.2, 0.5, 0.7}, {0, 2, 1}), std::invalid_argument);
  EXPECT_THROW(PredictiveDistribution({0.2, 0.5, 0.7}, {0, 1}), std::invalid_argument);
}

TEST(Distribution, CdfExamples) {
  auto d = three_point();
  EXPECT_DOUBLE_EQ(cdf_eval(d, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(cdf_eval(d, -1.0), 0.25);
  EXPECT_DOUBLE_EQ(cdf_eval(d, -5.0), 0.25);
  EXPECT_DOUBLE_EQ(cdf_eval(d, 5.0), 0.75);
  EXPECT_NEAR(cdf_eval(standard_normal(), 1.2816), 0.90, 0.005);
}

TEST(Distribution, QuantileExamples) {
  auto d = three_point();
  EXPECT_DOUBLE_EQ(quantile_eval(d, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(quantile_eval(d, 0.625), 0.5);
  EXPECT_DOUBLE_EQ(quantile_eval(d, 0.01), -1.0);
  EXPECT_THROW(quantile_eval(d, 0.0), std::domain_error);
  EXPECT_THROW(quantile_eval(d, 1.0), std::domain_error);
}

TEST(Distribution, MomentsExamples) {
  PredictiveDistribution c({0.1, 0.5, 0.9}, {0.3, 0.3, 0.3});
  EXPECT_DOUBLE_EQ(c.mean(), 0.3);
  EXPECT_DOUBLE_EQ(c.sd(), 0.0);
  EXPECT_NEAR(three_point().mean(), 0.0, 1e-15);
  auto n = standard_normal();
  EXPECT_NEAR(n.mean(), 0.0, 1e-3);
  EXPECT_NEAR(n.sd(), 1.0, 0.05);
}

TEST(Distribution, NormalGridMomentsAgainstMonteCarlo) {
  // sample through the grid's own quantile function
  auto n = standard_normal();
  CounterRng rng(5, "mc");
  const int draws = 1000000;
  double s = 0, ss = 0;
  for (int i = 0; i < draws; ++i) {
    double u = rng.uniform();
    double x = u <= 0.01 ? n.values().front() : (u >= 0.99 ? n.values().back() : quantile_eval(n, u));
    s += x;
    ss += x * x;
  }
  double m = s / draws;
  EXPECT_NEAR(n.mean(), m, 3e-3);
  EXPECT_NEAR(n.sd(), std::sqrt(ss / draws - m * m), 5e-3);
}

TEST(Distribution, PitOfOwnDrawsIsUniform) {
  PredictiveDistribution u = location_scale(0.0, 1.0, [](double p) { return p; });
  CounterRng rng(9, "pit");
  std::vector<double> pits;
  for (int i = 0; i < 10000; ++i) pits.push_back(pit(u, 0.01 + 0.98 * rng.uniform()));
  // outcomes uniform on the grid range map to Uniform(0.01, 0.99); rescale
  for (auto& p : pits) p = (p - 0.01) / 0.98;
  EXPECT_LT(ks_uniform(pits), 0.02);
  EXPECT_DOUBLE_EQ(pit(u, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(pit(u, -3.0), 0.01);
}

TEST(Distribution, RoundTripOnGrid) {
  CounterRng rng(1, "rt");
  for (int k = 0; k < 200; ++k) {
    auto d = random_dist(rng);
    for (std::size_t i = 0; i < d.size(); ++i) {
      // flat segments make the pseudo-inverse pick the segment's first level
      double q = quantile_eval(d, d.levels()[i]);
      EXPECT_EQ(q, d.values()[i]);
      bool flat_after = i + 1 < d.size() && d.values()[i + 1] == d.values()[i];
      if (!flat_after) EXPECT_DOUBLE_EQ(cdf_eval(d, q), d.levels()[i]);
    }
  }
}

TEST(Distribution, MonotoneInArgument) {
  CounterRng rng(2, "mono");
  for (int k = 0; k < 100; ++k) {
    auto d = random_dist(rng);
    double prev_c = -1, prev_q = -1e300;
    for (int i = 0; i <= 400; ++i) {
      double y = d.values().front() - 1 + (d.values().back() - d.values().front() + 2) * i / 400.0;
      double c = cdf_eval(d, y);
      EXPECT_GE(c, prev_c);
      prev_c = c;
      double a = 0.001 + 0.998 * i / 400.0;
      double q = quantile_eval(d, a);
      EXPECT_GE(q, prev_q);
      prev_q = q;
    }
  }
}

TEST(Distribution, ShiftMovesMeanOnly) {
  CounterRng rng(3, "shift");
  for (int k = 0; k < 50; ++k) {
    auto d = random_dist(rng);
    auto s = d.shifted(0.37);
    EXPECT_NEAR(s.mean(), d.mean() + 0.37, 1e-12);
    EXPECT_NEAR(s.sd(), d.sd(), 1e-12);
  }
}

TEST(Distribution, TrapezoidWeightsSumToOne) {
  auto w = trapezoid_weights(default_levels());
  double s = 0;
  for (double v : w) s += v;
  EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(Distribution, StudentTQuantile) {
  EXPECT_NEAR(student_t_quantile(0.95, 5.0), 2.015, 5e-4);
  EXPECT_NEAR(normal_quantile(0.975), 1.959964, 1e-6);
  EXPECT_NEAR(normal_cdf(1.959964), 0.975, 1e-6);
}

TEST(Covariance, ShrinksTowardDiagonal) {
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.5, 0.5, 2.0;
  CovarianceEstimate c(s, 0.4);
  EXPECT_DOUBLE_EQ(c.matrix()(0, 1), 0.3);
  EXPECT_DOUBLE_EQ(c.matrix()(1, 1), 2.0);
}

TEST(Covariance, RejectsAsymmetricAndIndefinite) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, 0.4, 1.0;
  EXPECT_THROW(CovarianceEstimate{a}, std::invalid_argument);
  Eigen::MatrixXd b(2, 2);
  b << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(CovarianceEstimate{b}, std::invalid_argument);
  EXPECT_NO_THROW(CovarianceEstimate(b, 1.0));
}

TEST(MarketObservation, Validation) {
  EXPECT_NO_THROW(validate(MarketObservation{0, 0.01, 0.02, 1e-4, 1.0}));
  EXPECT_THROW(validate(MarketObservation{0, 0.01, -0.02, 1e-4, 1.0}), std::invalid_argument);
  EXPECT_THROW(validate(MarketObservation{0, 0.01, 0.02, -1e-4, 1.0}), std::invalid_argument);
  EXPECT_THROW(validate(MarketObservation{0, 0.01, 0.02, 1e-4, 0.0}), std::invalid_argument);
}

}  // namespace uwc
