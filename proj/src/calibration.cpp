#include "uwc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace uwc {

// ---------------------------------------------------------------- maps

double MonotoneMap::operator()(double p) const {
  p = std::clamp(p, x.front(), x.back());
  auto it = std::upper_bound(x.begin(), x.end(), p);
  std::size_t k = static_cast<std::size_t>(it - x.begin());
  if (k >= x.size()) return y.back();
  k -= 1;
  double f = (p - x[k]) / (x[k + 1] - x[k]);
  return y[k] + f * (y[k + 1] - y[k]);
}

double MonotoneMap::inverse(double q) const {
  auto it = std::lower_bound(y.begin(), y.end(), q);
  if (it == y.begin()) return x.front();
  if (it == y.end()) return x.back();
  std::size_t k = static_cast<std::size_t>(it - y.begin());
  double f = (q - y[k - 1]) / (y[k] - y[k - 1]);
  return x[k - 1] + f * (x[k] - x[k - 1]);
}

bool MonotoneMap::is_identity() const { return x == y; }

double quantile_clamped(const PredictiveDistribution& dist, double alpha) {
  const auto& l = dist.levels();
  if (alpha <= l.front()) return dist.values().front();
  if (alpha >= l.back()) return dist.values().back();
  return quantile_eval(dist, alpha);
}

PredictiveDistribution compose_cdf_map(const MonotoneMap& g, const PredictiveDistribution& dist) {
  if (g.is_identity()) return dist;
  const auto& l = dist.levels();
  std::vector<double> v(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) v[i] = quantile_clamped(dist, g.inverse(l[i]));
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
  return PredictiveDistribution(l, std::move(v));
}

// ---------------------------------------------------------------- Platt

namespace {
double logit_clamped(double p) {
  p = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
}  // namespace

PlattMap platt_fit(const std::vector<double>& probs, const std::vector<int>& outcomes) {
  if (probs.size() != outcomes.size()) throw std::invalid_argument("platt_fit: length mismatch");
  if (probs.size() < 10) throw std::invalid_argument("platt_fit: need at least 10 observations");
  std::size_t ones = 0;
  for (int o : outcomes) {
    if (o != 0 && o != 1) throw std::invalid_argument("platt_fit: outcomes must be 0/1");
    ones += static_cast<std::size_t>(o);
  }
  if (ones == 0 || ones == outcomes.size()) throw std::invalid_argument("platt_fit: single-class sample");
  const std::size_t n = probs.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = logit_clamped(probs[i]);

  auto loglik = [&](double al, double be) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = al + be * x[i];
      // log sigma(z) and log(1 - sigma(z)) in stable form
      double l1 = -std::log1p(std::exp(-std::abs(z))) + std::min(z, 0.0);
      double l0 = -std::log1p(std::exp(-std::abs(z))) + std::min(-z, 0.0);
      s += outcomes[i] ? l1 : l0;
    }
    return s / static_cast<double>(n);
  };
  double al = 0.0, be = 1.0;
  PlattMap m;
  for (int it = 1; it <= 200; ++it) {
    double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(al + be * x[i]);
      double r = outcomes[i] - p;
      double v = p * (1.0 - p);
      g0 += r;
      g1 += r * x[i];
      h00 += v;
      h01 += v * x[i];
      h11 += v * x[i] * x[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    g0 *= inv_n, g1 *= inv_n, h00 *= inv_n, h01 *= inv_n, h11 *= inv_n;
    m.iterations = it;
    if (std::hypot(g0, g1) <= 1e-8) {
      m.a = -al;
      m.b = -be;
      return m;
    }
    double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0)) throw std::runtime_error("platt_fit: singular Hessian");
    double d0 = (h11 * g0 - h01 * g1) / det;
    double d1 = (h00 * g1 - h01 * g0) / det;
    double base = loglik(al, be);
    double step = 1.0;
    while (step > 1e-10 && loglik(al + step * d0, be + step * d1) < base - 1e-15) step *= 0.5;
    al += step * d0;
    be += step * d1;
  }
  throw std::runtime_error("platt_fit: Newton iterations did not converge");
}

double platt_apply(const PlattMap& m, double p) { return 1.0 / (1.0 + std::exp(m.a + m.b * logit_clamped(p))); }

// ---------------------------------------------------------------- isotonic

std::vector<double> pav(const std::vector<double>& y, const std::vector<double>& w_in) {
  const std::size_t n = y.size();
  std::vector<double> w = w_in.empty() ? std::vector<double>(n, 1.0) : w_in;
  if (w.size() != n) throw std::invalid_argument("pav: weight length mismatch");
  struct Block {
    double mean, weight;
    std::size_t count;
  };
  std::vector<Block> st;
  st.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.push_back({y[i], w[i], 1});
    while (st.size() > 1 && st[st.size() - 2].mean > st.back().mean) {
      Block b = st.back();
      st.pop_back();
      Block& a = st.back();
      double tw = a.weight + b.weight;
      a.mean = tw > 0 ? (a.mean * a.weight + b.mean * b.weight) / tw : 0.5 * (a.mean + b.mean);
      a.weight = tw;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& b : st) out.insert(out.end(), b.count, b.mean);
  return out;
}

double IsotonicMap::operator()(double p) const {
  auto it = std::upper_bound(x.begin(), x.end(), p);
  if (it == x.begin()) return value.front();
  return value[static_cast<std::size_t>(it - x.begin()) - 1];
}

IsotonicMap isotonic_fit(const std::vector<double>& probs, const std::vector<double>& outcomes) {
  if (probs.size() != outcomes.size()) throw std::invalid_argument("isotonic_fit: length mismatch");
  if (probs.size() < 2) throw std::invalid_argument("isotonic_fit: need at least 2 observations");
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  IsotonicMap m;
  std::vector<double> ys, ws;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double xv = probs[idx[k]];
    if (!m.x.empty() && m.x.back() == xv) {
      double& wb = ws.back();
      ys.back() = (ys.back() * wb + outcomes[idx[k]]) / (wb + 1.0);
      wb += 1.0;
    } else {
      m.x.push_back(xv);
      ys.push_back(outcomes[idx[k]]);
      ws.push_back(1.0);
    }
  }
  m.value = pav(ys, ws);
  return m;
}

// ---------------------------------------------------------------- quantile recalibration

double LevelMap::operator()(double alpha) const {
  MonotoneMap m{nominal, calibrated};
  return m(alpha);
}

LevelMap quantile_recalibrate(const std::vector<double>& levels, const std::vector<double>& hit_rates) {
  if (levels.size() != hit_rates.size() || levels.empty())
    throw std::invalid_argument("quantile_recalibrate: length mismatch");
  std::vector<double> h = pav(hit_rates);
  for (auto& v : h) v = std::clamp(v, 0.0, 1.0);
  // inverse of the (projected) coverage curve: level as a function of coverage
  std::vector<double> hx, lx;
  for (std::size_t i = 0; i < h.size();) {
    std::size_t j = i;
    double s = 0.0;
    while (j < h.size() && h[j] == h[i]) s += levels[j++];
    hx.push_back(h[i]);
    lx.push_back(s / static_cast<double>(j - i));
    i = j;
  }
  if (hx.front() > 0.0) {
    hx.insert(hx.begin(), 0.0);
    lx.insert(lx.begin(), 0.0);
  }
  if (hx.back() < 1.0) {
    hx.push_back(1.0);
    lx.push_back(1.0);
  }
  MonotoneMap inv{hx, lx};
  LevelMap out;
  out.nominal = {0.0};
  out.calibrated = {0.0};
  for (double a : levels) {
    out.nominal.push_back(a);
    out.calibrated.push_back(std::max(inv(a), out.calibrated.back()));
  }
  out.nominal.push_back(1.0);
  out.calibrated.push_back(1.0);
  return out;
}

PredictiveDistribution apply_level_map(const LevelMap& m, const PredictiveDistribution& dist) {
  const auto& l = dist.levels();
  std::vector<double> v(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) v[i] = quantile_clamped(dist, m(l[i]));
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
  return PredictiveDistribution(l, std::move(v));
}

// ---------------------------------------------------------------- PIT remap

MonotoneMap pit_remap_fit(const std::vector<double>& past_pits) {
  if (past_pits.size() < 100) throw std::invalid_argument("pit_remap_fit: need at least 100 PIT values");
  std::vector<double> p(past_pits);
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("pit_remap_fit: PIT outside [0,1]");
  std::sort(p.begin(), p.end());
  const double n1 = static_cast<double>(p.size()) + 1.0;
  MonotoneMap m;
  m.x.push_back(0.0);
  m.y.push_back(0.0);
  for (std::size_t i = 0; i < p.size();) {
    std::size_t j = i;
    while (j < p.size() && p[j] == p[i]) ++j;
    double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j)) / n1;
    if (p[i] > 0.0 && p[i] < 1.0) {
      m.x.push_back(p[i]);
      m.y.push_back(rank);
    }
    i = j;
  }
  m.x.push_back(1.0);
  m.y.push_back(1.0);
  return m;
}

// ---------------------------------------------------------------- warp

void CalibrationWarp::validate() const {
  if (knots.size() != theta.size() || knots.size() < 2) throw std::invalid_argument("CalibrationWarp: size mismatch");
  if (theta.front() != 0.0 || theta.back() != 1.0) throw std::invalid_argument("CalibrationWarp: endpoints not pinned");
  for (std::size_t k = 1; k < theta.size(); ++k) {
    if (theta[k] < theta[k - 1]) throw std::invalid_argument("CalibrationWarp: theta decreasing");
    if (!(knots[k] > knots[k - 1])) throw std::invalid_argument("CalibrationWarp: knots not increasing");
  }
}

CalibrationWarp identity_warp(const DiagnosticGrid& grid, double lambda) {
  CalibrationWarp w;
  w.grid = grid;
  w.penalty_lambda = lambda;
  return w;
}

PredictiveDistribution warp_apply(const CalibrationWarp& warp, const PredictiveDistribution& dist) {
  warp.validate();
  return compose_cdf_map(warp.map(), dist);
}

double calibration_moment(const PredictiveDistribution& dist, double y, double point, GridKind kind) {
  switch (kind) {
    case GridKind::thresholds:
      return (y <= point ? 1.0 : 0.0) - cdf_eval(dist, point);
    case GridKind::pit_bins:
      return (pit(dist, y) <= point ? 1.0 : 0.0) - point;
    case GridKind::quantile_levels:
    default:
      return (y <= quantile_clamped(dist, point) ? 1.0 : 0.0) - point;
  }
}

double uwc_criterion(const std::vector<PredictiveDistribution>& dists, const std::vector<double>& ys,
                     const WeightPanel& weights, const DiagnosticGrid& grid) {
  if (dists.empty()) throw std::invalid_argument("uwc_criterion: empty panel");
  if (dists.size() != ys.size() || dists.size() != weights.size())
    throw std::invalid_argument("uwc_criterion: length mismatch");
  const double T = static_cast<double>(dists.size());
  double total = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double s = 0.0;
    for (std::size_t t = 0; t < dists.size(); ++t) {
      double w = weights[t].at(j);
      if (w != 0.0) s += w * calibration_moment(dists[t], ys[t], grid.points[j], grid.kind);
    }
    s /= T;
    total += s * s;
  }
  return total;
}

namespace {

double roughness(const std::vector<double>& th) {
  double r = 0.0;
  for (std::size_t k = 1; k + 1 < th.size(); ++k) {
    double d = th[k + 1] - 2.0 * th[k] + th[k - 1];
    r += d * d;
  }
  return r;
}

/// Endpoint-pinned isotonic projection of the interior knot values.
void project_theta(std::vector<double>& th) {
  std::vector<double> inner(th.begin() + 1, th.end() - 1);
  inner = pav(inner);
  for (std::size_t k = 0; k < inner.size(); ++k) th[k + 1] = std::clamp(inner[k], 0.0, 1.0);
  th.front() = 0.0;
  th.back() = 1.0;
}

/// Smoothed-indicator surrogate of the penalised objective and its gradient.
class Surrogate {
 public:
  Surrogate(const std::vector<double>& knots, const std::vector<double>& pits, const WeightPanel& w,
            const DiagnosticGrid& grid, double lambda)
      : knots_(knots), w_(w), grid_(grid), lambda_(lambda), seg_(pits.size()), frac_(pits.size()) {
    for (std::size_t s = 0; s < pits.size(); ++s) {
      double p = std::clamp(pits[s], 0.0, 1.0);
      auto it = std::upper_bound(knots.begin(), knots.end(), p);
      std::size_t k = std::min(static_cast<std::size_t>(it - knots.begin()), knots.size() - 1) - 1;
      seg_[s] = k;
      frac_[s] = (p - knots[k]) / (knots[k + 1] - knots[k]);
    }
  }

  double value(const std::vector<double>& th, double h, std::vector<double>* grad) const {
    const std::size_t K = th.size();
    const double T = static_cast<double>(seg_.size());
    if (grad) grad->assign(K, 0.0);
    double J = 0.0;
    std::vector<double> dM(K);
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const double u = grid_.points[j];
      double M = 0.0;
      std::fill(dM.begin(), dM.end(), 0.0);
      for (std::size_t s = 0; s < seg_.size(); ++s) {
        double om = w_[s][j];
        if (om == 0.0) continue;
        std::size_t k = seg_[s];
        double f = frac_[s];
        double g = th[k] * (1.0 - f) + th[k + 1] * f;
        double z = (u - g) / h;
        double S = 1.0 / (1.0 + std::exp(-z));
        M += om * (S - u);
        if (grad) {
          double dS = -om * S * (1.0 - S) / h;
          dM[k] += dS * (1.0 - f);
          dM[k + 1] += dS * f;
        }
      }
      M /= T;
      J += M * M;
      if (grad)
        for (std::size_t k = 0; k < K; ++k) (*grad)[k] += 2.0 * M * dM[k] / T;
    }
    J += lambda_ * roughness(th);
    if (grad) {
      for (std::size_t k = 1; k + 1 < K; ++k) {
        double d = 2.0 * lambda_ * (th[k + 1] - 2.0 * th[k] + th[k - 1]);
        (*grad)[k - 1] += d;
        (*grad)[k] -= 2.0 * d;
        (*grad)[k + 1] += d;
      }
      (*grad).front() = 0.0;
      (*grad).back() = 0.0;
    }
    return J;
  }

 private:
  const std::vector<double>& knots_;
  const WeightPanel& w_;
  const DiagnosticGrid& grid_;
  double lambda_;
  std::vector<std::size_t> seg_;
  std::vector<double> frac_;
};

/// Exact indicator objective in O(|U| log T) per theta, from PIT-sorted weight prefix sums.
/// Y <= F^{-1}(c) is read as PIT <= c, with PITs above the grid pushed past 1.
class FastObjective {
 public:
  FastObjective(const std::vector<PredictiveDistribution>& dists, const std::vector<double>& ys, const WeightPanel& w,
                const DiagnosticGrid& grid, double lambda)
      : grid_(grid), lambda_(lambda), T_(static_cast<double>(dists.size())) {
    lo_ = dists.front().levels().front();
    hi_ = dists.front().levels().back();
    std::vector<std::pair<double, std::size_t>> order(dists.size());
    for (std::size_t s = 0; s < dists.size(); ++s) {
      const auto& d = dists[s];
      if (d.levels().front() != lo_ || d.levels().back() != hi_) usable_ = false;
      double p = ys[s] > d.values().back() ? 2.0 : pit(d, ys[s]);
      order[s] = {p, s};
    }
    std::sort(order.begin(), order.end());
    sorted_.resize(order.size());
    prefix_.assign(grid.size(), std::vector<double>(order.size() + 1, 0.0));
    for (std::size_t r = 0; r < order.size(); ++r) {
      sorted_[r] = order[r].first;
      for (std::size_t j = 0; j < grid.size(); ++j) prefix_[j][r + 1] = prefix_[j][r] + w[order[r].second][j];
    }
  }

  bool usable() const { return usable_; }

  double operator()(const std::vector<double>& th, const std::vector<double>& knots) const {
    MonotoneMap g{knots, th};
    double total = 0.0;
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      const double u = grid_.points[j];
      double c = std::clamp(g.inverse(u), lo_, hi_);
      auto n = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), c) - sorted_.begin());
      double M = (prefix_[j][n] - u * prefix_[j].back()) / T_;
      total += M * M;
    }
    return total + lambda_ * roughness(th);
  }

 private:
  const DiagnosticGrid& grid_;
  double lambda_;
  double T_;
  double lo_ = 0.0, hi_ = 1.0;
  bool usable_ = true;
  std::vector<double> sorted_;
  std::vector<std::vector<double>> prefix_;
};

/// Coarse monotone grid over the interior knots, then a compass search with step halving.
std::vector<double> global_search(const FastObjective& f, const std::vector<double>& knots, int coarse = 20) {
  const std::size_t K = knots.size();
  std::vector<double> th(K, 0.0), best;
  th.back() = 1.0;
  double best_val = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int from) {
    if (k + 1 == K) {
      double v = f(th, knots);
      if (v < best_val) {
        best_val = v;
        best = th;
      }
      return;
    }
    for (int i = from; i <= coarse; ++i) {
      th[k] = static_cast<double>(i) / coarse;
      rec(k + 1, i);
    }
  };
  rec(1, 0);
  for (double step = 0.5 / coarse; step >= 1e-4; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t k = 1; k + 1 < K; ++k)
        for (double dir : {-1.0, 1.0}) {
          std::vector<double> trial = best;
          trial[k] = std::clamp(trial[k] + dir * step, trial[k - 1], trial[k + 1]);
          double v = f(trial, knots);
          if (v < best_val - 1e-15) {
            best_val = v;
            best = std::move(trial);
            improved = true;
          }
        }
    }
  }
  return best;
}

}  // namespace

double uwc_objective(const std::vector<double>& theta, const std::vector<PredictiveDistribution>& dists,
                     const std::vector<double>& ys, const WeightPanel& weights, const DiagnosticGrid& grid,
                     double lambda) {
  CalibrationWarp w;
  w.theta = theta;
  w.grid = grid;
  w.validate();
  const auto g = w.map();
  const double T = static_cast<double>(dists.size());
  double total = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double c = grid.kind == GridKind::quantile_levels ? g.inverse(grid.points[j]) : grid.points[j];
    double s = 0.0;
    for (std::size_t t = 0; t < dists.size(); ++t) {
      double om = weights[t][j];
      if (om == 0.0) continue;
      double m;
      if (grid.kind == GridKind::quantile_levels)
        m = (ys[t] <= quantile_clamped(dists[t], c) ? 1.0 : 0.0) - grid.points[j];
      else
        m = calibration_moment(compose_cdf_map(g, dists[t]), ys[t], grid.points[j], grid.kind);
      s += om * m;
    }
    s /= T;
    total += s * s;
  }
  return total + lambda * roughness(theta);
}

WeightPanel scale_weights(const WeightPanel& weights, WeightScaling scaling) {
  if (scaling == WeightScaling::none) return weights;
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& row : weights)
    for (double v : row) {
      s += v;
      ++n;
    }
  if (n == 0 || !(s > 0.0)) return weights;
  double mean = s / static_cast<double>(n);
  WeightPanel out(weights);
  for (auto& row : out)
    for (auto& v : row) v /= mean;
  return out;
}

UwcFit uwc_fit(const std::vector<PredictiveDistribution>& dists, const std::vector<double>& ys,
               const WeightPanel& raw_weights, const DiagnosticGrid& grid, const UwcOptions& opts) {
  grid.validate();
  if (grid.kind != GridKind::quantile_levels) throw std::invalid_argument("uwc_fit: requires a quantile-level grid");
  if (dists.size() != ys.size() || dists.size() != raw_weights.size())
    throw std::invalid_argument("uwc_fit: length mismatch");
  if (dists.size() < opts.min_window)
    throw std::invalid_argument("uwc_fit: calibration window shorter than " + std::to_string(opts.min_window));
  for (const auto& row : raw_weights) {
    if (row.size() != grid.size()) throw std::invalid_argument("uwc_fit: weight row length differs from grid");
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("uwc_fit: weights must be finite and >= 0");
  }
  const WeightPanel weights = scale_weights(raw_weights, opts.scaling);

  UwcFit fit;
  fit.warp = identity_warp(grid, opts.lambda);
  const std::vector<double> ident = fit.warp.theta;
  fit.identity_objective = uwc_objective(ident, dists, ys, weights, grid, opts.lambda);
  fit.objective = fit.identity_objective;

  std::vector<double> pits(dists.size());
  for (std::size_t s = 0; s < dists.size(); ++s) pits[s] = pit(dists[s], ys[s]);
  Surrogate sur(fit.warp.knots, pits, weights, grid, opts.lambda);

  std::vector<double> th = ident, best = ident, grad, trial;
  double best_exact = fit.identity_objective;
  FastObjective fast(dists, ys, weights, grid, opts.lambda);
  if (fast.usable()) {
    std::vector<double> g = global_search(fast, fit.warp.knots);
    double exact = uwc_objective(g, dists, ys, weights, grid, opts.lambda);
    if (exact < best_exact) {
      best_exact = exact;
      best = g;
    }
  }
  int used = 0;
  bool last_converged = false;
  for (double h : opts.bandwidths) {
    double step = 1.0;
    double J = sur.value(th, h, &grad);
    last_converged = false;
    while (used < opts.max_iterations) {
      ++used;
      // projected gradient step with halving until sufficient decrease
      double Jn = J;
      for (;;) {
        trial = th;
        for (std::size_t k = 0; k < th.size(); ++k) trial[k] -= step * grad[k];
        project_theta(trial);
        double dec = 0.0;
        for (std::size_t k = 0; k < th.size(); ++k) dec += grad[k] * (th[k] - trial[k]);
        Jn = sur.value(trial, h, nullptr);
        if (Jn <= J - 1e-4 * dec || step < 1e-12) break;
        step *= 0.5;
      }
      double move = 0.0;
      for (std::size_t k = 0; k < th.size(); ++k) move = std::max(move, std::abs(trial[k] - th[k]));
      th = trial;
      double pg = move / step;
      J = sur.value(th, h, &grad);
      if (pg <= opts.gradient_tolerance || move == 0.0) {
        last_converged = true;
        break;
      }
      step = std::min(step * 2.0, 1e6);
    }
    double exact = uwc_objective(th, dists, ys, weights, grid, opts.lambda);
    if (exact < best_exact) {
      best_exact = exact;
      best = th;
    }
  }
  fit.iterations = used;
  if (!last_converged) {
    fit.converged = false;
    fit.warning = "uwc_fit: projected gradient did not converge; identity warp returned";
    return fit;
  }
  fit.warp.theta = best;
  fit.objective = best_exact;
  return fit;
}

}  // namespace uwc
