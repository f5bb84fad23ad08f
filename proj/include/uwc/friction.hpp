#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace uwc {

enum class ImpactKind { quadratic, sqrt_participation };

struct FrictionModel {
  double fee_rate = 0.0;
  /// When set, overrides the per-period spread carried by FrictionState.
  std::optional<double> fixed_spread;
  ImpactKind impact_kind = ImpactKind::quadratic;
  double impact_coeff = 0.0;
  double cost_multiplier = 1.0;

  void validate() const;
};

struct FrictionState {
  double spread = 0.0;
  double volatility = 0.0;
  double volume = 1.0;
  double kappa = 1.0;
};

struct CostBreakdown {
  double linear = 0.0;
  double impact = 0.0;
  double total = 0.0;
};

double spread_rate(const FrictionModel& model, const FrictionState& state);

CostBreakdown cost_breakdown(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& delta_w);
double cost_total(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& delta_w);
/// Per-asset volumes for the square-root law.
double cost_total(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& delta_w,
                  const Eigen::VectorXd& volumes);

struct FeasibleSet {
  bool budget = false;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double turnover_cap = 1e6;
  double leverage_cap = 1e6;
  /// max |dw_i| <= participation_cap * V_i
  std::optional<double> participation_cap;

  static FeasibleSet open(Eigen::Index n, double bound = 1e6);
  Eigen::Index dim() const { return lower.size(); }
  /// Throws if invariants fail or the set cannot contain w_prev clipped to the box.
  void validate(const Eigen::VectorXd& w_prev) const;
};

struct Membership {
  bool ok = true;
  std::vector<std::string> violated;
};

Membership feasible_contains(const FeasibleSet& fs, const Eigen::VectorXd& w, const Eigen::VectorXd& w_prev,
                             const Eigen::VectorXd& volume, double tol = 1e-9);

double kappa(double spread, double volatility, double med_spread, double med_vol);

/// kappa_t with trailing-median normalizers over at most `window` periods ending at t.
std::vector<double> kappa_series(const std::vector<double>& spreads, const std::vector<double>& vols,
                                 std::size_t window = 500);

/// Tercile boundaries (1/3 and 2/3 empirical quantiles, type-7 interpolation).
std::pair<double, double> tercile_bounds(std::vector<double> x);

}  // namespace uwc
