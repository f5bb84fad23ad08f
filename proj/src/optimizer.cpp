#include "uwc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace uwc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActiveTol = 1e-9;

double soft(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

/// Euclidean projection onto {y : |y - c|_1 <= r} (sort-based).
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& x, const Eigen::VectorXd& c, double r) {
  Eigen::VectorXd v = x - c;
  if (v.lpNorm<1>() <= r) return x;
  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    double t = (cum - r) / static_cast<double>(j + 1);
    if (j + 1 == u.size() || u[j + 1] <= t) {
      theta = t;
      break;
    }
  }
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = c(i) + soft(v(i), theta);
  return out;
}

/// Constraint geometry prepared once per problem.
struct Geometry {
  Eigen::VectorXd lo, hi;  // box intersected with participation band (and, for n = 1, everything else)
  Eigen::VectorXd w_prev;
  bool budget = false;
  double tau = kInf;
  double lev = kInf;
  bool separable = true;
  bool empty = false;
};

Geometry make_geometry(const DecisionProblem& p, bool drop_turnover) {
  const auto n = p.dim();
  const auto& fs = p.feasible;
  Geometry g;
  g.w_prev = p.w_prev;
  g.lo = fs.lower;
  g.hi = fs.upper;
  g.budget = fs.budget;
  g.tau = drop_turnover ? kInf : fs.turnover_cap;
  g.lev = fs.leverage_cap;
  if (fs.participation_cap) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double band = *fs.participation_cap * p.volume(i);
      g.lo(i) = std::max(g.lo(i), p.w_prev(i) - band);
      g.hi(i) = std::min(g.hi(i), p.w_prev(i) + band);
    }
  }
  if (n == 1) {
    // every constraint is an interval on the single coordinate
    g.lo(0) = std::max({g.lo(0), p.w_prev(0) - g.tau, -g.lev});
    g.hi(0) = std::min({g.hi(0), p.w_prev(0) + g.tau, g.lev});
    if (g.budget) {
      if (g.lo(0) <= 1.0 && 1.0 <= g.hi(0)) {
        g.lo(0) = 1.0;
        g.hi(0) = 1.0;
      } else {
        g.empty = true;
      }
    }
    g.budget = false;
    g.tau = kInf;
    g.lev = kInf;
  } else {
    g.separable = !g.budget && g.tau == kInf && g.lev == kInf;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (g.lo(i) > g.hi(i)) g.empty = true;
  return g;
}

bool in_set(const Geometry& g, const Eigen::VectorXd& w, double tol) {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) < g.lo(i) - tol || w(i) > g.hi(i) + tol) return false;
  if (g.budget && std::abs(w.sum() - 1.0) > tol) return false;
  if (g.tau < kInf && (w - g.w_prev).lpNorm<1>() > g.tau + tol) return false;
  if (g.lev < kInf && w.lpNorm<1>() > g.lev + tol) return false;
  return true;
}

class Prox {
 public:
  Prox(const Geometry& g, double eta, int max_iter) : g_(g), eta_(eta), max_iter_(max_iter) {}

  /// argmin 0.5|w - z|^2 + t*eta*|w - w_prev|_1 over the feasible set.
  Eigen::VectorXd operator()(const Eigen::VectorXd& z, double t) const {
    Eigen::VectorXd p = separable_part(z, t * eta_);
    if (g_.separable || in_set(g_, p, 0.0)) return p;
    return dykstra(z, t);
  }

 private:
  Eigen::VectorXd separable_part(const Eigen::VectorXd& z, double thr) const {
    Eigen::VectorXd p(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      p(i) = std::clamp(g_.w_prev(i) + soft(z(i) - g_.w_prev(i), thr), g_.lo(i), g_.hi(i));
    return p;
  }

  Eigen::VectorXd project(int which, const Eigen::VectorXd& x) const {
    switch (which) {
      case 1:
        return (x.array() + (1.0 - x.sum()) / static_cast<double>(x.size())).matrix();
      case 2:
        return project_l1_ball(x, g_.w_prev, g_.tau);
      default:
        return project_l1_ball(x, Eigen::VectorXd::Zero(x.size()), g_.lev);
    }
  }

  // Parallel Dykstra-like splitting for the prox of a sum of functions.
  Eigen::VectorXd dykstra(const Eigen::VectorXd& z, double t) const {
    std::vector<int> parts{0};
    if (g_.budget) parts.push_back(1);
    if (g_.tau < kInf) parts.push_back(2);
    if (g_.lev < kInf) parts.push_back(3);
    const double m = static_cast<double>(parts.size());
    std::vector<Eigen::VectorXd> zs(parts.size(), z), ps(parts.size());
    Eigen::VectorXd x = z;
    for (int it = 0; it < max_iter_; ++it) {
      for (std::size_t j = 0; j < parts.size(); ++j)
        ps[j] = parts[j] == 0 ? separable_part(zs[j], m * t * eta_) : project(parts[j], zs[j]);
      Eigen::VectorXd xn = Eigen::VectorXd::Zero(z.size());
      for (const auto& pj : ps) xn += pj;
      xn /= m;
      for (std::size_t j = 0; j < parts.size(); ++j) zs[j] += xn - ps[j];
      double change = (xn - x).lpNorm<Eigen::Infinity>();
      x = xn;
      if (change <= 1e-16 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) break;
    }
    return x;
  }

  const Geometry& g_;
  double eta_;
  int max_iter_;
};

struct RawSolve {
  Eigen::VectorXd w;
  double residual = kInf;
  int iterations = 0;
  bool empty = false;
};

RawSolve raw_solve(const DecisionProblem& p, double eta, bool drop_turnover, const SolverSettings& s, double lip) {
  RawSolve out;
  Geometry g = make_geometry(p, drop_turnover);
  if (g.empty) {
    out.empty = true;
    return out;
  }
  Prox prox(g, eta, s.dykstra_max_iterations);
  const Eigen::MatrixXd& S = p.sigma.matrix();
  auto grad = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return -p.mu + p.gamma * (S * w) + p.eta_quad * (w - p.w_prev);
  };
  const double step = 1.0 / lip;
  // warm start: w_prev moved onto the feasible set
  Eigen::VectorXd w = prox(p.w_prev, 0.0);
  if (!in_set(g, w, kActiveTol)) {
    out.empty = true;
    return out;
  }
  int it = 0;
  for (; it < s.max_iterations; ++it) {
    Eigen::VectorXd wn = prox(w - step * grad(w), step);
    double change = (wn - w).lpNorm<Eigen::Infinity>();
    w = std::move(wn);
    if (change <= s.step_tolerance * std::max(1.0, w.lpNorm<Eigen::Infinity>())) {
      ++it;
      break;
    }
  }
  Eigen::VectorXd mapped = prox(w - step * grad(w), step);
  out.residual = lip * (w - mapped).lpNorm<Eigen::Infinity>();
  if (!in_set(g, w, kActiveTol)) out.residual = kInf;
  out.w = std::move(w);
  out.iterations = it;
  return out;
}

BindingFlags binding_flags(const DecisionProblem& p, const Eigen::VectorXd& w, bool turnover_dropped) {
  const auto& fs = p.feasible;
  BindingFlags b;
  b.budget = fs.budget;
  Eigen::VectorXd dw = w - p.w_prev;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) <= fs.lower(i) + kActiveTol || w(i) >= fs.upper(i) - kActiveTol) b.box = true;
    if (fs.participation_cap && std::abs(dw(i)) >= *fs.participation_cap * p.volume(i) - kActiveTol)
      b.participation = true;
  }
  if (!turnover_dropped) b.turnover = dw.lpNorm<1>() >= fs.turnover_cap - kActiveTol;
  b.leverage = w.lpNorm<1>() >= fs.leverage_cap - kActiveTol;
  return b;
}

double turnover_multiplier(const DecisionProblem& p, const SolverSettings& s, double lip) {
  SolverSettings inner = s;
  inner.recover_multipliers = false;
  const double tau = p.feasible.turnover_cap;
  auto turnover_at = [&](double lam) {
    RawSolve r = raw_solve(p, p.eta_l1 + lam, true, inner, lip);
    if (r.empty) return kInf;
    return (r.w - p.w_prev).lpNorm<1>();
  };
  if (turnover_at(0.0) <= tau) return 0.0;
  Eigen::VectorXd g0 = -p.mu + p.gamma * (p.sigma.matrix() * p.w_prev);
  double hi = g0.lpNorm<Eigen::Infinity>() + 1.0;
  while (turnover_at(hi) > tau && hi < 1e12) hi *= 2.0;
  double lo = 0.0;
  for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++k) {
    double mid = 0.5 * (lo + hi);
    if (turnover_at(mid) > tau)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Budget and leverage multipliers by least squares on coordinates whose subgradients are singletons.
void recover_equality_multipliers(const DecisionProblem& p, const Eigen::VectorXd& w, DecisionOutcome& out) {
  const auto& fs = p.feasible;
  const bool want_nu = fs.budget;
  const bool want_lev = out.binding.leverage;
  if (!want_nu && !want_lev) return;
  Eigen::VectorXd grad = -p.mu + p.gamma * (p.sigma.matrix() * w) + p.eta_quad * (w - p.w_prev);
  Eigen::VectorXd dw = w - p.w_prev;
  std::vector<double> rhs, sgn;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    bool interior = w(i) > fs.lower(i) + kActiveTol && w(i) < fs.upper(i) - kActiveTol;
    if (fs.participation_cap && std::abs(dw(i)) >= *fs.participation_cap * p.volume(i) - kActiveTol) interior = false;
    if (!interior || std::abs(dw(i)) <= 1e-12 || std::abs(w(i)) <= 1e-12) continue;
    double base = grad(i) + (p.eta_l1 + out.multipliers.turnover) * (dw(i) > 0 ? 1.0 : -1.0);
    rhs.push_back(-base);
    sgn.push_back(w(i) > 0 ? 1.0 : -1.0);
  }
  if (rhs.empty()) return;
  const auto m = static_cast<Eigen::Index>(rhs.size());
  auto fit = [&](bool nu, bool lev, double& nu_out, double& lev_out) {
    Eigen::MatrixXd A(m, (nu ? 1 : 0) + (lev ? 1 : 0));
    Eigen::VectorXd b(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      Eigen::Index c = 0;
      if (nu) A(r, c++) = 1.0;
      if (lev) A(r, c++) = sgn[static_cast<std::size_t>(r)];
      b(r) = rhs[static_cast<std::size_t>(r)];
    }
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    Eigen::Index c = 0;
    nu_out = nu ? x(c++) : 0.0;
    lev_out = lev ? x(c++) : 0.0;
  };
  double nu = 0.0, lev = 0.0;
  const bool collinear =
      want_nu && want_lev && std::all_of(sgn.begin(), sgn.end(), [&](double v) { return v == sgn.front(); });
  if (collinear) {
    // only nu + s*lev is identified; take the smallest lev the zero-weight coordinates admit
    const double s = sgn.front();
    double c = 0.0;
    for (double r : rhs) c += r;
    c /= static_cast<double>(m);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (std::abs(w(i)) > 1e-12) continue;
      const double l1 = p.eta_l1 + out.multipliers.turnover;
      double a = -l1, b = l1;
      if (std::abs(dw(i)) > 1e-12) a = b = l1 * (dw(i) > 0 ? 1.0 : -1.0);
      double r = -grad(i) - c;
      lev = std::max(lev, s > 0 ? 0.5 * (a - r) : 0.5 * (r - b));
    }
    out.multipliers.budget = c - s * lev;
    out.multipliers.leverage = lev;
    return;
  }
  fit(want_nu, want_lev, nu, lev);
  if (lev < 0.0) {
    lev = 0.0;
    if (want_nu) fit(true, false, nu, lev);
  }
  out.multipliers.budget = nu;
  out.multipliers.leverage = lev;
}

}  // namespace

DecisionProblem::DecisionProblem(Eigen::VectorXd mu_, CovarianceEstimate sigma_, double gamma_, double eta_l1_,
                                 double eta_quad_, Eigen::VectorXd w_prev_, FeasibleSet feasible_)
    : mu(std::move(mu_)),
      sigma(std::move(sigma_)),
      gamma(gamma_),
      eta_l1(eta_l1_),
      eta_quad(eta_quad_),
      w_prev(std::move(w_prev_)),
      feasible(std::move(feasible_)),
      volume(Eigen::VectorXd::Ones(mu.size())) {}

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal:
      return "optimal";
    case SolverStatus::fallback_previous:
      return "fallback_previous";
    case SolverStatus::infeasible_relaxed:
      return "infeasible_relaxed";
  }
  return "unknown";
}

Eigen::VectorXd solve_closed_form(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double gamma,
                                  double eta_quad, const Eigen::VectorXd& w_prev) {
  const auto n = mu.size();
  if (sigma.rows() != n || sigma.cols() != n || w_prev.size() != n)
    throw std::invalid_argument("solve_closed_form: dimension mismatch");
  Eigen::MatrixXd A = gamma * sigma + eta_quad * Eigen::MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 1e-12 * std::max(1.0, lmax)))
    throw std::domain_error("solve_closed_form: gamma*Sigma + eta_quad*I is singular or ill-conditioned (min eigenvalue " +
                            std::to_string(lmin) + ")");
  return A.llt().solve(mu + eta_quad * w_prev);
}

std::pair<double, double> curvature_bounds(const DecisionProblem& p) {
  const auto n = p.dim();
  Eigen::MatrixXd A = p.gamma * p.sigma.matrix() + p.eta_quad * Eigen::MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

double objective_value(const DecisionProblem& p, const Eigen::VectorXd& w) {
  Eigen::VectorXd dw = w - p.w_prev;
  return p.mu.dot(w) - 0.5 * p.gamma * w.dot(p.sigma.matrix() * w) - p.eta_l1 * dw.lpNorm<1>() -
         0.5 * p.eta_quad * dw.squaredNorm();
}

DecisionOutcome solve_constrained(const DecisionProblem& p, const SolverSettings& s) {
  const auto n = p.dim();
  if (n == 0 || p.sigma.dim() != n || p.w_prev.size() != n || p.feasible.dim() != n || p.volume.size() != n)
    throw std::invalid_argument("solve_constrained: dimension mismatch");
  if (!(p.gamma > 0.0)) throw std::invalid_argument("solve_constrained: gamma must be positive");
  if (!(p.eta_l1 >= 0.0) || !(p.eta_quad >= 0.0)) throw std::invalid_argument("solve_constrained: negative eta");
  if (!p.mu.allFinite() || !p.w_prev.allFinite()) throw std::invalid_argument("solve_constrained: non-finite input");
  p.feasible.validate(p.w_prev);

  double lip = std::max(curvature_bounds(p).second, 1e-12);
  DecisionOutcome out;
  bool relaxed = false;
  RawSolve r = raw_solve(p, p.eta_l1, false, s, lip);
  if (r.empty) {
    relaxed = true;
    r = raw_solve(p, p.eta_l1, true, s, lip);
    if (r.empty) throw std::runtime_error("solve_constrained: relaxed feasible set is empty");
  }
  out.iterations = r.iterations;
  out.kkt_residual = r.residual;
  if (!(r.residual <= s.tolerance)) {
    out.status = SolverStatus::fallback_previous;
    out.weights = p.w_prev;
  } else {
    out.status = relaxed ? SolverStatus::infeasible_relaxed : SolverStatus::optimal;
    out.weights = r.w;
  }
  out.delta_w = out.weights - p.w_prev;
  out.turnover = out.delta_w.lpNorm<1>();
  out.objective_value = objective_value(p, out.weights);
  out.binding = binding_flags(p, out.weights, relaxed);
  if (out.status != SolverStatus::fallback_previous && s.recover_multipliers) {
    if (out.binding.turnover) out.multipliers.turnover = turnover_multiplier(p, s, lip);
    recover_equality_multipliers(p, out.weights, out);
  }
  return out;
}

double KktReport::max_residual() const { return std::max({stationarity, primal, dual, complementarity}); }

KktReport kkt_report(const DecisionProblem& p, const DecisionOutcome& o) {
  KktReport k;
  if (o.status != SolverStatus::optimal) {
    k.applicable = false;
    return k;
  }
  const auto& fs = p.feasible;
  const Eigen::VectorXd& w = o.weights;
  Eigen::VectorXd dw = w - p.w_prev;
  Eigen::VectorXd grad = -p.mu + p.gamma * (p.sigma.matrix() * w) + p.eta_quad * dw;
  const double lt = o.multipliers.turnover, ll = o.multipliers.leverage, nu = o.multipliers.budget;
  const double l1 = p.eta_l1 + lt;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    // interval [a, b] of admissible values for -(grad_i + nu)
    double a = 0.0, b = 0.0;
    if (std::abs(dw(i)) <= 1e-12) {
      a -= l1;
      b += l1;
    } else {
      double sg = dw(i) > 0 ? 1.0 : -1.0;
      a += l1 * sg;
      b += l1 * sg;
    }
    if (std::abs(w(i)) <= 1e-12) {
      a -= ll;
      b += ll;
    } else {
      double sg = w(i) > 0 ? 1.0 : -1.0;
      a += ll * sg;
      b += ll * sg;
    }
    bool at_up = w(i) >= fs.upper(i) - kActiveTol;
    bool at_lo = w(i) <= fs.lower(i) + kActiveTol;
    if (fs.participation_cap) {
      double band = *fs.participation_cap * p.volume(i);
      if (dw(i) >= band - kActiveTol) at_up = true;
      if (dw(i) <= -band + kActiveTol) at_lo = true;
    }
    if (at_up) b = kInf;
    if (at_lo) a = -kInf;
    double target = -(grad(i) + nu);
    double dist = target < a ? a - target : (target > b ? target - b : 0.0);
    k.stationarity = std::max(k.stationarity, dist);
  }
  Eigen::VectorXd vol = p.volume;
  double primal = 0.0;
  if (fs.budget) primal = std::max(primal, std::abs(w.sum() - 1.0));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    primal = std::max({primal, fs.lower(i) - w(i), w(i) - fs.upper(i)});
    if (fs.participation_cap) primal = std::max(primal, std::abs(dw(i)) - *fs.participation_cap * vol(i));
  }
  primal = std::max({primal, dw.lpNorm<1>() - fs.turnover_cap, w.lpNorm<1>() - fs.leverage_cap});
  k.primal = std::max(primal, 0.0);
  k.dual = std::max({0.0, -lt, -ll});
  k.complementarity =
      std::max(std::abs(lt * (dw.lpNorm<1>() - fs.turnover_cap)), std::abs(ll * (w.lpNorm<1>() - fs.leverage_cap)));
  return k;
}

}  // namespace uwc
