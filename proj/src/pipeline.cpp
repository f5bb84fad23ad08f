#include "uwc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "uwc/rng.hpp"

namespace uwc {

const char* to_string(CalibrationKind k) {
  switch (k) {
    case CalibrationKind::none:
      return "none";
    case CalibrationKind::pit_remap:
      return "pit_remap";
    case CalibrationKind::quantile_recal:
      return "quantile_recal";
    case CalibrationKind::uwc:
      return "uwc";
  }
  return "unknown";
}

CalibrationKind calibration_kind_from(const std::string& s) {
  if (s == "none") return CalibrationKind::none;
  if (s == "pit_remap") return CalibrationKind::pit_remap;
  if (s == "quantile_recal") return CalibrationKind::quantile_recal;
  if (s == "uwc") return CalibrationKind::uwc;
  throw std::invalid_argument("unknown calibration kind '" + s + "'");
}

void WalkForwardConfig::validate() const {
  if (t_train == 0 || t_val == 0 || t_test == 0 || horizon == 0)
    throw std::invalid_argument("WalkForwardConfig: block lengths and horizon must be positive");
  if (embargo < horizon) throw std::invalid_argument("WalkForwardConfig: embargo must be >= horizon");
  if (methods.empty()) throw std::invalid_argument("WalkForwardConfig: no methods");
  if (warp_lambdas.empty() || ewma_lambdas.empty())
    throw std::invalid_argument("WalkForwardConfig: hyper grid must be non-empty");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i].id.empty() || methods[i].id.find(',') != std::string::npos)
      throw std::invalid_argument("WalkForwardConfig: method ids must be non-empty and comma-free");
    for (std::size_t j = 0; j < i; ++j)
      if (methods[j].id == methods[i].id) throw std::invalid_argument("WalkForwardConfig: duplicate method id");
    methods[i].forecaster.validate();
  }
  for (double l : warp_lambdas)
    if (!(l >= 0.0)) throw std::invalid_argument("WalkForwardConfig: warp lambda < 0");
  for (double l : ewma_lambdas)
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("WalkForwardConfig: ewma lambda outside (0,1)");
}

void DecisionConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("DecisionConfig: gamma must be positive");
  if (!(position_bound > 0.0)) throw std::invalid_argument("DecisionConfig: position_bound must be positive");
  if (!(planning_eta_quad >= 0.0)) throw std::invalid_argument("DecisionConfig: planning_eta_quad < 0");
  friction.validate();
  grid.validate();
  if (kappa_window == 0) throw std::invalid_argument("DecisionConfig: kappa_window must be positive");
}

void leakage_guard(std::size_t from, std::size_t to, std::size_t test_start, std::size_t embargo, const char* what) {
  if (from > to || to + embargo > test_start) {
    std::ostringstream msg;
    msg << "leakage guard: " << what << " window [" << from << ", " << to << ") intrudes on the embargo before "
        << test_start;
    throw LeakageError(msg.str());
  }
}

std::vector<BlockLayout> block_layout(const WalkForwardConfig& wf, std::size_t origin, std::size_t T) {
  std::vector<BlockLayout> out;
  const std::size_t e = wf.embargo;
  std::size_t start = origin + wf.t_train + e + wf.t_val + e;
  for (std::size_t b = 0; start + wf.t_test <= T; ++b, start += wf.t_test) {
    BlockLayout L;
    L.origin = origin;
    L.test_start = start;
    L.test_end = start + wf.t_test;
    L.val_end = start - e;
    L.val_start = L.val_end - wf.t_val;
    L.select_to = L.val_start - e;
    L.select_from = wf.refit == RefitScheme::rolling ? L.select_to - wf.t_train : origin;
    L.final_to = L.test_start - e;
    L.final_from = wf.refit == RefitScheme::rolling ? L.final_to - wf.t_train : origin;
    out.push_back(L);
  }
  if (out.size() < 3)
    throw std::invalid_argument("walk-forward: series too short for three outer blocks (have " +
                                std::to_string(out.size()) + ")");
  return out;
}

PredictiveDistribution Calibrator::apply(const PredictiveDistribution& dist) const {
  if (identity) return dist;
  switch (kind) {
    case CalibrationKind::none:
      return dist;
    case CalibrationKind::pit_remap:
      return compose_cdf_map(pit_map, dist);
    case CalibrationKind::quantile_recal:
      return apply_level_map(level_map, dist);
    case CalibrationKind::uwc:
      return warp_apply(warp, dist);
  }
  return dist;
}

PredictiveDistribution perturb_forecast(const PredictiveDistribution& dist, double shift_sd, double vol_mult) {
  if (shift_sd == 0.0 && vol_mult == 1.0) return dist;
  const double m = dist.mean();
  const double s = dist.sd();
  std::vector<double> v(dist.values());
  for (auto& x : v) x = m + vol_mult * (x - m) + shift_sd * vol_mult * s;
  return PredictiveDistribution(dist.levels(), std::move(v));
}

namespace {

std::string variant_key(const ForecasterConfig& c) {
  std::ostringstream k;
  k.precision(17);
  k << to_string(c.kind) << '|' << c.window << '|' << c.ewma_lambda << '|' << static_cast<int>(c.innovation) << '|'
    << c.nu << '|' << c.shrink << '|' << c.bias_scale << '|' << c.bias_offset;
  return k.str();
}

std::size_t warmup(const ForecasterConfig& c) {
  return c.kind == ForecasterKind::overconfident_sim ? 0 : c.window;
}

struct Step {
  DecisionOutcome outcome;
  Accounting acct;
  double planned_cost = 0.0;
};

}  // namespace

struct WalkForwardEngine::Impl {
  MarketData data;
  WalkForwardConfig wf;
  DecisionConfig dc;
  std::uint64_t seed;
  PlaceboSpec placebo;
  std::size_t T = 0;
  std::size_t origin_ = 0;
  std::vector<double> returns;
  std::vector<double> kappa;
  std::vector<BlockLayout> layout;
  /// forecast source index used at each t
  std::vector<std::size_t> source;
  std::map<std::string, std::vector<PredictiveDistribution>> cache;

  Impl(MarketData d, WalkForwardConfig w, DecisionConfig c, std::uint64_t s, PlaceboSpec p)
      : data(std::move(d)), wf(std::move(w)), dc(std::move(c)), seed(s), placebo(p) {
    wf.validate();
    dc.validate();
    T = data.market.size();
    for (const auto& o : data.market) {
      validate(o);
      returns.push_back(o.realized_return);
    }
    std::vector<double> spreads, vols;
    for (const auto& o : data.market) {
      spreads.push_back(o.spread);
      vols.push_back(o.volatility);
    }
    kappa = kappa_series(spreads, vols, dc.kappa_window);
    for (const auto& m : wf.methods) {
      origin_ = std::max(origin_, warmup(m.forecaster));
      if (m.forecaster.kind == ForecasterKind::overconfident_sim) {
        if (!data.latent || data.latent->true_sd.size() != T || data.latent->signal.size() != T)
          throw DataError("overconfident_sim forecaster requires latent signal and true_sd for every period");
      }
    }
    layout = block_layout(wf, origin_, T);
    build_source();
  }

  void build_source() {
    source.resize(T);
    for (std::size_t t = 0; t < T; ++t) source[t] = t;
    if (placebo.mode == PlaceboMode::time_shift) {
      for (std::size_t t = origin_; t < T; ++t) source[t] = t >= origin_ + placebo.shift ? t - placebo.shift : origin_;
    } else if (placebo.mode == PlaceboMode::shuffle_within_block) {
      std::vector<std::size_t> bounds;
      const std::size_t anchor = layout.front().test_start;
      for (std::size_t b = anchor; b > origin_; b = b >= origin_ + wf.t_test ? b - wf.t_test : origin_) bounds.push_back(b);
      bounds.push_back(origin_);
      for (std::size_t b = anchor + wf.t_test; b < T; b += wf.t_test) bounds.push_back(b);
      bounds.push_back(T);
      std::sort(bounds.begin(), bounds.end());
      bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
      for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        CounterRng rng(seed, "placebo/shuffle", k);
        for (std::size_t i = bounds[k + 1] - 1; i > bounds[k]; --i) {
          std::size_t j = bounds[k] + static_cast<std::size_t>(rng.below(i - bounds[k] + 1));
          std::swap(source[i], source[j]);
        }
      }
    }
  }

  const std::vector<PredictiveDistribution>& series(const ForecasterConfig& cfg) {
    auto key = variant_key(cfg);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<PredictiveDistribution> out;
    out.reserve(T - origin_);
    for (std::size_t s = origin_; s < T; ++s) {
      switch (cfg.kind) {
        case ForecasterKind::overconfident_sim: {
          CounterRng rng(seed, "forecaster/overconfident_sim", s);
          out.push_back(overconfident_sim(data.latent->true_sd[s], cfg, rng, data.latent->signal[s]));
          break;
        }
        case ForecasterKind::rolling_empirical:
        case ForecasterKind::ewma_parametric: {
          // information set for the outcome at s: returns strictly before s
          std::vector<double> window(returns.begin() + static_cast<std::ptrdiff_t>(s - cfg.window),
                                     returns.begin() + static_cast<std::ptrdiff_t>(s));
          out.push_back(cfg.kind == ForecasterKind::rolling_empirical ? rolling_empirical(window)
                                                                      : ewma_parametric(window, cfg));
          break;
        }
      }
    }
    return cache.emplace(key, std::move(out)).first->second;
  }

  const PredictiveDistribution& forecast(const ForecasterConfig& cfg, std::size_t t) {
    return series(cfg)[source[t] - origin_];
  }

  FrictionState state(std::size_t t) const {
    const auto& o = data.market[t];
    return {o.spread, o.volatility, o.volume, kappa[t]};
  }

  Step decide(const PredictiveDistribution& F, double w_prev, std::size_t t, double cost_mult) const {
    FrictionModel fm = dc.friction;
    fm.cost_multiplier *= cost_mult;
    const FrictionState st = state(t);
    const double var = std::max(F.sd() * F.sd(), 1e-16);
    const double eta_l1 = fm.cost_multiplier * (fm.fee_rate + spread_rate(fm, st));
    const double k_quad = fm.impact_kind == ImpactKind::quadratic ? fm.impact_coeff : dc.planning_eta_quad;
    const double eta_quad = fm.cost_multiplier * k_quad;

    FeasibleSet fs;
    fs.lower = Eigen::VectorXd::Constant(1, -dc.position_bound);
    fs.upper = Eigen::VectorXd::Constant(1, dc.position_bound);
    fs.turnover_cap = dc.turnover_cap;
    fs.leverage_cap = dc.leverage_cap;
    fs.participation_cap = dc.participation_cap;
    Eigen::VectorXd wp = Eigen::VectorXd::Constant(1, w_prev);
    DecisionProblem p(Eigen::VectorXd::Constant(1, F.mean()), CovarianceEstimate(Eigen::MatrixXd::Constant(1, 1, var)),
                      dc.gamma, eta_l1, eta_quad, wp, fs);
    p.volume = Eigen::VectorXd::Constant(1, st.volume);

    Step s;
    s.outcome = solve_constrained(p, dc.solver);
    s.acct = decision_loss(s.outcome.weights, wp, Eigen::VectorXd::Constant(1, returns[t]), fm, st, dc.utility);
    const double dw = std::abs(s.outcome.weights(0) - w_prev);
    s.planned_cost = eta_l1 * dw + 0.5 * eta_quad * dw * dw;
    return s;
  }

  PanelRow row(const MethodSpec& m, std::size_t t, const Step& s) const {
    PanelRow r;
    r.timestamp = data.market[t].timestamp;
    r.symbol = data.symbol;
    r.method = m.id;
    r.decision_loss = s.acct.loss;
    r.net_return = s.acct.net;
    r.turnover = s.outcome.delta_w.lpNorm<1>();
    r.total_cost = s.acct.cost;
    r.constraint_bound = s.outcome.binding.any_inequality();
    r.kappa = kappa[t];
    r.solver_status = to_string(s.outcome.status);
    return r;
  }

  std::vector<Candidate> candidates(const MethodSpec& m) const {
    std::vector<double> wl = m.calibration == CalibrationKind::uwc ? wf.warp_lambdas : std::vector<double>{dc.uwc.lambda};
    std::vector<double> el = m.forecaster.kind == ForecasterKind::ewma_parametric
                                 ? wf.ewma_lambdas
                                 : std::vector<double>{m.forecaster.ewma_lambda};
    std::vector<Candidate> out;
    for (double e : el)
      for (double w : wl) out.push_back({w, e});
    return out;
  }

  static ForecasterConfig variant(const MethodSpec& m, const Candidate& c) {
    ForecasterConfig f = m.forecaster;
    f.ewma_lambda = c.ewma_lambda;
    return f;
  }

  Calibrator fit(const MethodSpec& m, const Candidate& c, std::size_t from, std::size_t to,
                 const std::vector<double>& w_live, std::string* warning) {
    Calibrator cal;
    cal.kind = m.calibration;
    cal.fitted_from = from;
    cal.fitted_to = to;
    if (m.calibration == CalibrationKind::none) return cal;
    const ForecasterConfig fc = variant(m, c);
    std::vector<PredictiveDistribution> dists;
    std::vector<double> ys;
    for (std::size_t s = from; s < to; ++s) {
      dists.push_back(forecast(fc, s));
      ys.push_back(returns[s]);
    }
    switch (m.calibration) {
      case CalibrationKind::none:
        break;
      case CalibrationKind::pit_remap: {
        std::vector<double> p;
        for (std::size_t i = 0; i < dists.size(); ++i) p.push_back(pit(dists[i], ys[i]));
        cal.pit_map = pit_remap_fit(p);
        cal.identity = cal.pit_map.is_identity();
        break;
      }
      case CalibrationKind::quantile_recal: {
        const auto& lv = dists.front().levels();
        std::vector<double> hits(lv.size(), 0.0);
        for (std::size_t i = 0; i < dists.size(); ++i)
          for (std::size_t j = 0; j < lv.size(); ++j)
            if (ys[i] <= dists[i].values()[j]) hits[j] += 1.0;
        for (auto& h : hits) h /= static_cast<double>(dists.size());
        cal.level_map = quantile_recalibrate(lv, hits);
        cal.identity = false;
        break;
      }
      case CalibrationKind::uwc: {
        WeightPanel weights;
        for (std::size_t i = 0; i < dists.size(); ++i) {
          const std::size_t s = from + i;
          Influence inf = influence_coeffs(dists[i], dc.grid);
          auto kp = kappa_profile(kappa[s], dc.grid, dc.kappa_profile);
          // w* from the decision solved one period earlier
          const double w_star = s > origin_ ? w_live[s - 1] : 0.0;
          weights.push_back(compute_weights(w_star, dc.gamma, inf, kp).weights);
        }
        UwcOptions opts = dc.uwc;
        opts.lambda = c.warp_lambda;
        UwcFit f = uwc_fit(dists, ys, weights, dc.grid, opts);
        if (!f.converged && warning) *warning = f.warning;
        cal.warp = f.warp;
        cal.warp.fitted_from = static_cast<std::int64_t>(from);
        cal.warp.fitted_to = static_cast<std::int64_t>(to);
        cal.identity = cal.warp.map().is_identity();
        break;
      }
    }
    return cal;
  }

  MethodRun run_method(const MethodSpec& m, EvaluationPanel& panel) {
    MethodRun run;
    run.spec = m;
    run.calibrators.push_back(Calibrator{});
    std::vector<double> w_live(T, 0.0);
    std::size_t next = origin_;
    std::size_t cur_cal = 0;
    ForecasterConfig cur_var = m.forecaster;
    const std::size_t first_test = layout.front().test_start;
    double planned = 0.0, realized = 0.0;

    auto advance = [&](std::size_t to) {
      for (; next < to; ++next) {
        const std::size_t t = next;
        double wp = t > origin_ ? w_live[t - 1] : 0.0;
        Step s = decide(run.calibrators[cur_cal].apply(forecast(cur_var, t)), wp, t, 1.0);
        w_live[t] = s.outcome.weights(0);
        if (t >= first_test) {
          panel.push_back(row(m, t, s));
          run.test_index.push_back(t);
          run.calibrator_of.push_back(cur_cal);
          run.variant_of.push_back(cur_var);
          planned += s.planned_cost;
          realized += s.acct.cost;
        }
      }
    };

    const auto cands = candidates(m);
    for (std::size_t b = 0; b < layout.size(); ++b) {
      const BlockLayout& L = layout[b];
      BlockRecord rec;
      rec.block = b;
      std::size_t chosen = 0;
      if (cands.size() > 1) {
        leakage_guard(L.select_from, L.select_to, L.val_start, wf.embargo, "selection calibration");
        leakage_guard(L.val_start, L.val_end, L.test_start, wf.embargo, "validation");
        advance(L.val_start);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
          Calibrator cal = fit(m, cands[ci], L.select_from, L.select_to, w_live, nullptr);
          const ForecasterConfig fc = variant(m, cands[ci]);
          double w = L.val_start > origin_ ? w_live[L.val_start - 1] : 0.0;
          double loss = 0.0;
          for (std::size_t t = L.val_start; t < L.val_end; ++t) {
            Step s = decide(cal.apply(forecast(fc, t)), w, t, 1.0);
            w = s.outcome.weights(0);
            loss += s.acct.loss;
          }
          loss /= static_cast<double>(L.val_end - L.val_start);
          rec.validation_losses.push_back(loss);
          if (loss < best) {
            best = loss;
            chosen = ci;
          }
        }
      }
      rec.selected = cands[chosen];
      advance(L.test_start);
      if (b == 0) run.w_before_test = L.test_start > origin_ ? w_live[L.test_start - 1] : 0.0;

      leakage_guard(L.final_from, L.final_to, L.test_start, wf.embargo, "calibration");
      run.calibrators.push_back(fit(m, rec.selected, L.final_from, L.final_to, w_live, &rec.warning));
      cur_cal = run.calibrators.size() - 1;
      cur_var = variant(m, rec.selected);

      if (wf.refit_interval == 0 || m.calibration == CalibrationKind::none) {
        advance(L.test_end);
      } else {
        for (std::size_t t = L.test_start; t < L.test_end; t += wf.refit_interval) {
          if (t > L.test_start) {
            std::size_t to = t - wf.embargo;
            std::size_t from = wf.refit == RefitScheme::rolling ? to - wf.t_train : origin_;
            leakage_guard(from, to, t, wf.embargo, "per-period calibration");
            run.calibrators.push_back(fit(m, rec.selected, from, to, w_live, &rec.warning));
            cur_cal = run.calibrators.size() - 1;
          }
          advance(std::min(t + wf.refit_interval, L.test_end));
        }
      }
      run.blocks.push_back(std::move(rec));
    }
    const double n = static_cast<double>(std::max<std::size_t>(run.test_index.size(), 1));
    run.mean_planned_cost = planned / n;
    run.mean_realized_cost = realized / n;
    return run;
  }
};

WalkForwardEngine::WalkForwardEngine(MarketData data, WalkForwardConfig wf, DecisionConfig dc, std::uint64_t seed,
                                     PlaceboSpec placebo)
    : impl_(std::make_unique<Impl>(std::move(data), std::move(wf), std::move(dc), seed, placebo)) {}

WalkForwardEngine::~WalkForwardEngine() = default;

std::size_t WalkForwardEngine::origin() const { return impl_->origin_; }
const std::vector<double>& WalkForwardEngine::kappa() const { return impl_->kappa; }

WalkForwardResult WalkForwardEngine::run() {
  WalkForwardResult res;
  res.layout = impl_->layout;
  res.kappa = impl_->kappa;
  for (const auto& m : impl_->wf.methods) res.runs.push_back(impl_->run_method(m, res.panel));
  sort_panel(res.panel);
  return res;
}

EvaluationPanel WalkForwardEngine::replay(const MethodRun& run, const StressScenario& sc) {
  sc.validate();
  auto& I = *impl_;
  EvaluationPanel out;
  double w = run.w_before_test;
  for (std::size_t i = 0; i < run.test_index.size(); ++i) {
    const std::size_t t = run.test_index[i];
    PredictiveDistribution F = run.calibrators[run.calibrator_of[i]].apply(I.forecast(run.variant_of[i], t));
    F = perturb_forecast(F, sc.mean_shift_sd, sc.vol_multiplier);
    Step s = I.decide(F, w, t, sc.cost_multiplier);
    w = s.outcome.weights(0);
    out.push_back(I.row(run.spec, t, s));
  }
  return out;
}

WalkForwardResult run_walk_forward(const MarketData& data, const WalkForwardConfig& wf, const DecisionConfig& dc,
                                   std::uint64_t seed, PlaceboSpec placebo) {
  WalkForwardEngine engine(data, wf, dc, seed, placebo);
  return engine.run();
}

}  // namespace uwc
