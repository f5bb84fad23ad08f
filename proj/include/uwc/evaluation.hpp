#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uwc/friction.hpp"

namespace uwc {

struct PanelRow {
  std::int64_t timestamp = 0;
  std::string symbol;
  std::string method;
  double decision_loss = 0.0;
  double net_return = 0.0;
  double turnover = 0.0;
  double total_cost = 0.0;
  bool constraint_bound = false;
  double kappa = 1.0;
  std::string solver_status;
};

using EvaluationPanel = std::vector<PanelRow>;

/// Stable sort by (timestamp, method).
void sort_panel(EvaluationPanel& panel);
std::vector<std::string> panel_methods(const EvaluationPanel& panel);
/// Rows of one method in timestamp order.
EvaluationPanel method_rows(const EvaluationPanel& panel, const std::string& method);
std::vector<double> method_losses(const EvaluationPanel& panel, const std::string& method);

enum class UtilityKind { linear, mean_variance };

struct Utility {
  UtilityKind kind = UtilityKind::linear;
  /// certainty-equivalent penalty a/2 * net^2 for mean_variance
  double risk_aversion = 0.0;
  double operator()(double net) const;
};

struct Accounting {
  double gross = 0.0;
  double cost = 0.0;
  double net = 0.0;
  double loss = 0.0;
};

Accounting decision_loss(const Eigen::VectorXd& w, const Eigen::VectorXd& w_prev, const Eigen::VectorXd& realized,
                         const FrictionModel& friction, const FrictionState& state, const Utility& utility = {});

inline double regret(double loss_candidate, double loss_benchmark) { return loss_candidate - loss_benchmark; }
/// Per-period regret of the candidate against the benchmark (paired by row order).
std::vector<double> paired_differential(const EvaluationPanel& panel, const std::string& candidate,
                                        const std::string& benchmark);

inline constexpr double kDefaultPeriodsPerYear = 98280.0;

struct EndpointSummary {
  std::size_t n = 0;
  double mean_loss = 0.0;
  double mean_net = 0.0;
  double mean_turnover = 0.0;
  double mean_cost = 0.0;
  double constraint_freq = 0.0;
  /// NaN when the net series has zero dispersion
  double sharpe_annualised = std::numeric_limits<double>::quiet_NaN();
  double cvar_5 = 0.0;
  double max_drawdown = 0.0;
  std::vector<double> regime_mean_loss;
};

EndpointSummary endpoints(const EvaluationPanel& rows, double periods_per_year = kDefaultPeriodsPerYear);

/// Mean of the worst ceil(5%) net returns.
double cvar_lower(const std::vector<double>& net, double alpha = 0.05);
/// Largest peak-to-trough decline of the compounded wealth path, as a fraction of the peak.
double max_drawdown(const std::vector<double>& net);

struct TercileStat {
  std::size_t n = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double hac_se = std::numeric_limits<double>::quiet_NaN();
  double t_stat = std::numeric_limits<double>::quiet_NaN();
};

struct RegimeSplit {
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool degenerate = false;
  /// low, mid, high kappa
  TercileStat tercile[3];
};

/// Tercile means of a paired differential conditioned on kappa.
RegimeSplit regime_split(const std::vector<double>& differential, const std::vector<double>& kappa);

}  // namespace uwc
