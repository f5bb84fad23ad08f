#include "uwc/friction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwc {

void FrictionModel::validate() const {
  if (!(fee_rate >= 0.0)) throw std::invalid_argument("FrictionModel: fee_rate < 0");
  if (fixed_spread && !(*fixed_spread >= 0.0)) throw std::invalid_argument("FrictionModel: spread < 0");
  if (!(impact_coeff >= 0.0)) throw std::invalid_argument("FrictionModel: impact_coeff < 0");
  if (!(cost_multiplier >= 0.0)) throw std::invalid_argument("FrictionModel: cost_multiplier < 0");
}

double spread_rate(const FrictionModel& model, const FrictionState& state) {
  return model.fixed_spread ? *model.fixed_spread : state.spread;
}

namespace {

CostBreakdown breakdown_impl(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& dw,
                             const Eigen::VectorXd* volumes) {
  if (!dw.allFinite()) throw std::invalid_argument("cost_total: non-finite delta_w");
  CostBreakdown c;
  c.linear = (model.fee_rate + spread_rate(model, state)) * dw.lpNorm<1>();
  if (model.impact_coeff > 0.0) {
    if (model.impact_kind == ImpactKind::quadratic) {
      c.impact = 0.5 * model.impact_coeff * dw.squaredNorm();
    } else {
      double s = 0.0;
      for (Eigen::Index i = 0; i < dw.size(); ++i) {
        double v = volumes ? (*volumes)(i) : state.volume;
        if (!(v > 0.0)) throw std::invalid_argument("cost_total: volume must be positive");
        double a = std::abs(dw(i));
        s += a * std::sqrt(a) / std::sqrt(v);
      }
      c.impact = model.impact_coeff * state.volatility * s;
    }
  }
  c.linear *= model.cost_multiplier;
  c.impact *= model.cost_multiplier;
  c.total = c.linear + c.impact;
  return c;
}

}  // namespace

CostBreakdown cost_breakdown(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& dw) {
  return breakdown_impl(model, state, dw, nullptr);
}

double cost_total(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& dw) {
  return breakdown_impl(model, state, dw, nullptr).total;
}

double cost_total(const FrictionModel& model, const FrictionState& state, const Eigen::VectorXd& dw,
                  const Eigen::VectorXd& volumes) {
  if (volumes.size() != dw.size()) throw std::invalid_argument("cost_total: volume dimension mismatch");
  return breakdown_impl(model, state, dw, &volumes).total;
}

FeasibleSet FeasibleSet::open(Eigen::Index n, double bound) {
  FeasibleSet fs;
  fs.lower = Eigen::VectorXd::Constant(n, -bound);
  fs.upper = Eigen::VectorXd::Constant(n, bound);
  fs.turnover_cap = bound;
  fs.leverage_cap = bound;
  return fs;
}

void FeasibleSet::validate(const Eigen::VectorXd& w_prev) const {
  if (lower.size() != upper.size() || lower.size() != w_prev.size())
    throw std::invalid_argument("FeasibleSet: dimension mismatch");
  if (!(turnover_cap > 0.0)) throw std::invalid_argument("FeasibleSet: turnover_cap must be > 0");
  if (!(leverage_cap > 0.0)) throw std::invalid_argument("FeasibleSet: leverage_cap must be > 0");
  if (participation_cap && !(*participation_cap > 0.0))
    throw std::invalid_argument("FeasibleSet: participation_cap must be > 0");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower(i) <= upper(i))) throw std::invalid_argument("FeasibleSet: lower > upper");
  // box and leverage must admit some point; with a budget the box must straddle 1/n-scaled sums
  double min_abs = 0.0;
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    min_abs += (lower(i) > 0.0) ? lower(i) : (upper(i) < 0.0 ? -upper(i) : 0.0);
  if (min_abs > leverage_cap + 1e-9) throw std::invalid_argument("FeasibleSet: box incompatible with leverage cap");
  if (budget && (lower.sum() > 1.0 + 1e-9 || upper.sum() < 1.0 - 1e-9 || leverage_cap < 1.0 - 1e-9))
    throw std::invalid_argument("FeasibleSet: budget constraint unattainable");
}

Membership feasible_contains(const FeasibleSet& fs, const Eigen::VectorXd& w, const Eigen::VectorXd& w_prev,
                             const Eigen::VectorXd& volume, double tol) {
  const auto n = w.size();
  if (w_prev.size() != n || fs.lower.size() != n || fs.upper.size() != n ||
      (fs.participation_cap && volume.size() != n))
    throw std::invalid_argument("feasible_contains: dimension mismatch");
  Membership m;
  auto fail = [&](const char* what) {
    m.ok = false;
    m.violated.emplace_back(what);
  };
  if (fs.budget && std::abs(w.sum() - 1.0) > tol) fail("budget");
  bool box = false;
  for (Eigen::Index i = 0; i < n; ++i)
    if (w(i) < fs.lower(i) - tol || w(i) > fs.upper(i) + tol) box = true;
  if (box) fail("box");
  Eigen::VectorXd dw = w - w_prev;
  if (dw.lpNorm<1>() > fs.turnover_cap + tol) fail("turnover_cap");
  if (w.lpNorm<1>() > fs.leverage_cap + tol) fail("leverage_cap");
  if (fs.participation_cap) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(dw(i)) > *fs.participation_cap * volume(i) + tol) {
        fail("participation_cap");
        break;
      }
  }
  return m;
}

double kappa(double spread, double volatility, double med_spread, double med_vol) {
  if (!(med_spread > 0.0) || !(med_vol > 0.0)) throw std::invalid_argument("kappa: normalizers must be positive");
  if (!(spread >= 0.0) || !(volatility >= 0.0)) throw std::invalid_argument("kappa: negative input");
  return (spread / med_spread) * (volatility / med_vol);
}

namespace {
double median_of(std::vector<double>& buf) {
  const std::size_t n = buf.size();
  auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(buf.begin(), mid, buf.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(buf.begin(), mid);
  return 0.5 * (lo + hi);
}
}  // namespace

std::vector<double> kappa_series(const std::vector<double>& spreads, const std::vector<double>& vols,
                                 std::size_t window) {
  if (spreads.size() != vols.size()) throw std::invalid_argument("kappa_series: length mismatch");
  if (window == 0) throw std::invalid_argument("kappa_series: window must be positive");
  std::vector<double> out(spreads.size());
  std::vector<double> buf;
  for (std::size_t t = 0; t < spreads.size(); ++t) {
    std::size_t start = (t + 1 > window) ? t + 1 - window : 0;
    buf.assign(spreads.begin() + static_cast<std::ptrdiff_t>(start), spreads.begin() + static_cast<std::ptrdiff_t>(t + 1));
    double ms = median_of(buf);
    buf.assign(vols.begin() + static_cast<std::ptrdiff_t>(start), vols.begin() + static_cast<std::ptrdiff_t>(t + 1));
    double mv = median_of(buf);
    out[t] = kappa(spreads[t], vols[t], ms, mv);
  }
  return out;
}

std::pair<double, double> tercile_bounds(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("tercile_bounds: empty series");
  std::sort(x.begin(), x.end());
  auto q = [&](double p) {
    double h = (static_cast<double>(x.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
  };
  return {q(1.0 / 3.0), q(2.0 / 3.0)};
}

}  // namespace uwc
