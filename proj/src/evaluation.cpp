#include "uwc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uwc/inference.hpp"

namespace uwc {

void sort_panel(EvaluationPanel& panel) {
  std::stable_sort(panel.begin(), panel.end(), [](const PanelRow& a, const PanelRow& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.method < b.method;
  });
}

std::vector<std::string> panel_methods(const EvaluationPanel& panel) {
  std::vector<std::string> out;
  for (const auto& r : panel)
    if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
  return out;
}

EvaluationPanel method_rows(const EvaluationPanel& panel, const std::string& method) {
  EvaluationPanel out;
  for (const auto& r : panel)
    if (r.method == method) out.push_back(r);
  std::stable_sort(out.begin(), out.end(),
                   [](const PanelRow& a, const PanelRow& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<double> method_losses(const EvaluationPanel& panel, const std::string& method) {
  std::vector<double> out;
  for (const auto& r : method_rows(panel, method)) out.push_back(r.decision_loss);
  return out;
}

double Utility::operator()(double net) const {
  if (kind == UtilityKind::linear) return net;
  return net - 0.5 * risk_aversion * net * net;
}

Accounting decision_loss(const Eigen::VectorXd& w, const Eigen::VectorXd& w_prev, const Eigen::VectorXd& realized,
                         const FrictionModel& friction, const FrictionState& state, const Utility& utility) {
  if (w.size() != w_prev.size() || w.size() != realized.size())
    throw std::invalid_argument("decision_loss: dimension mismatch");
  Accounting a;
  a.gross = w.dot(realized);
  a.cost = cost_total(friction, state, w - w_prev);
  a.net = a.gross - a.cost;
  a.loss = -utility(a.net);
  return a;
}

std::vector<double> paired_differential(const EvaluationPanel& panel, const std::string& candidate,
                                        const std::string& benchmark) {
  auto c = method_rows(panel, candidate);
  auto b = method_rows(panel, benchmark);
  if (c.size() != b.size()) throw std::invalid_argument("paired_differential: unequal method lengths");
  std::vector<double> d(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].timestamp != b[i].timestamp) throw std::invalid_argument("paired_differential: misaligned timestamps");
    d[i] = regret(c[i].decision_loss, b[i].decision_loss);
  }
  return d;
}

double cvar_lower(const std::vector<double>& net, double alpha) {
  if (net.empty()) throw std::invalid_argument("cvar_lower: empty series");
  std::vector<double> s(net);
  std::sort(s.begin(), s.end());
  auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(s.size()) - 1e-12));
  k = std::max<std::size_t>(k, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += s[i];
  return sum / static_cast<double>(k);
}

double max_drawdown(const std::vector<double>& net) {
  double wealth = 1.0, peak = 1.0, mdd = 0.0;
  for (double r : net) {
    wealth *= 1.0 + r;
    peak = std::max(peak, wealth);
    mdd = std::max(mdd, (peak - wealth) / peak);
  }
  return mdd;
}

EndpointSummary endpoints(const EvaluationPanel& rows, double periods_per_year) {
  if (rows.empty()) throw std::invalid_argument("endpoints: empty panel");
  EndpointSummary s;
  s.n = rows.size();
  std::vector<double> net;
  net.reserve(rows.size());
  std::size_t bound = 0;
  for (const auto& r : rows) {
    s.mean_loss += r.decision_loss;
    s.mean_net += r.net_return;
    s.mean_turnover += r.turnover;
    s.mean_cost += r.total_cost;
    if (r.constraint_bound) ++bound;
    net.push_back(r.net_return);
  }
  const double n = static_cast<double>(rows.size());
  s.mean_loss /= n;
  s.mean_net /= n;
  s.mean_turnover /= n;
  s.mean_cost /= n;
  s.constraint_freq = static_cast<double>(bound) / n;
  double sd = sd_of(net);
  // a constant series leaves only rounding residue in sd
  bool constant = std::all_of(net.begin(), net.end(), [&](double v) { return v == net.front(); });
  if (sd > 0.0 && !constant) s.sharpe_annualised = std::sqrt(periods_per_year) * s.mean_net / sd;
  s.cvar_5 = cvar_lower(net, 0.05);
  s.max_drawdown = max_drawdown(net);

  std::vector<double> kap;
  for (const auto& r : rows) kap.push_back(r.kappa);
  auto [lo, hi] = tercile_bounds(kap);
  if (lo < hi) {
    double sum[3] = {0, 0, 0};
    std::size_t cnt[3] = {0, 0, 0};
    for (const auto& r : rows) {
      int k = r.kappa <= lo ? 0 : (r.kappa <= hi ? 1 : 2);
      sum[k] += r.decision_loss;
      ++cnt[k];
    }
    for (int k = 0; k < 3; ++k)
      s.regime_mean_loss.push_back(cnt[k] ? sum[k] / static_cast<double>(cnt[k])
                                          : std::numeric_limits<double>::quiet_NaN());
  }
  return s;
}

RegimeSplit regime_split(const std::vector<double>& d, const std::vector<double>& kappa) {
  if (d.size() != kappa.size()) throw std::invalid_argument("regime_split: differential and kappa misaligned");
  if (d.empty()) throw std::invalid_argument("regime_split: empty series");
  RegimeSplit r;
  std::tie(r.lower_bound, r.upper_bound) = tercile_bounds(kappa);
  if (!(r.lower_bound < r.upper_bound)) {
    r.degenerate = true;
    r.tercile[0].n = d.size();
    r.tercile[0].mean = mean_of(d);
    return r;
  }
  std::vector<double> part[3];
  for (std::size_t i = 0; i < d.size(); ++i) {
    int k = kappa[i] <= r.lower_bound ? 0 : (kappa[i] <= r.upper_bound ? 1 : 2);
    part[k].push_back(d[i]);
  }
  for (int k = 0; k < 3; ++k) {
    auto& t = r.tercile[k];
    t.n = part[k].size();
    if (t.n == 0) continue;
    t.mean = mean_of(part[k]);
    if (t.n > 1) {
      t.hac_se = hac_se(part[k]);
      if (t.hac_se > 0.0) t.t_stat = t.mean / t.hac_se;
    }
  }
  return r;
}

}  // namespace uwc
