#include "uwc/experiment.hpp"
#include <cmath>
#include <map>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "uwc/inference.hpp"
#include "uwc/rng.hpp"

namespace uwc {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

ForecasterConfig parse_forecaster(const json& j, const std::string& where) {
  check_keys(j, {"kind", "window", "ewma_lambda", "innovation", "nu", "shrink", "bias_scale", "bias_offset"}, where);
  ForecasterConfig f;
  f.kind = forecaster_kind_from(get<std::string>(j, "kind", to_string(f.kind), where));
  f.window = get<std::size_t>(j, "window", f.window, where);
  f.ewma_lambda = get<double>(j, "ewma_lambda", f.ewma_lambda, where);
  auto inn = get<std::string>(j, "innovation", "gaussian", where);
  if (inn == "gaussian")
    f.innovation = Innovation::gaussian;
  else if (inn == "student_t")
    f.innovation = Innovation::student_t;
  else
    throw ConfigError(where + ".innovation: expected gaussian or student_t");
  f.nu = get<double>(j, "nu", f.nu, where);
  f.shrink = get<double>(j, "shrink", f.shrink, where);
  f.bias_scale = get<double>(j, "bias_scale", f.bias_scale, where);
  f.bias_offset = get<double>(j, "bias_offset", f.bias_offset, where);
  return f;
}

json forecaster_json(const ForecasterConfig& f) {
  return {{"kind", to_string(f.kind)},
          {"window", f.window},
          {"ewma_lambda", f.ewma_lambda},
          {"innovation", f.innovation == Innovation::gaussian ? "gaussian" : "student_t"},
          {"nu", f.nu},
          {"shrink", f.shrink},
          {"bias_scale", f.bias_scale},
          {"bias_offset", f.bias_offset}};
}

RegimeLevels parse_regime(const json& j, RegimeLevels r, const std::string& where) {
  check_keys(j, {"vol_mult", "spread", "volume_median"}, where);
  r.vol_mult = get<double>(j, "vol_mult", r.vol_mult, where);
  r.spread = get<double>(j, "spread", r.spread, where);
  r.volume_median = get<double>(j, "volume_median", r.volume_median, where);
  return r;
}

}  // namespace

ScenarioSpec parse_scenario(const json& j) {
  const std::string w = "scenario";
  check_keys(j, {"kind", "length", "true_mean", "true_sd", "stay", "regimes", "start_state", "volume_sigma",
                 "spread_noise", "signal_strength", "signal_phi", "seed"},
             w);
  ScenarioSpec s = ScenarioSpec::preset(scenario_kind_from(get<std::string>(j, "kind", "noise_chasing", w)));
  s.length = get<std::size_t>(j, "length", s.length, w);
  s.true_mean = get<double>(j, "true_mean", s.true_mean, w);
  s.true_sd = get<double>(j, "true_sd", s.true_sd, w);
  if (j.contains("stay")) {
    auto v = get<std::vector<double>>(j, "stay", {}, w);
    if (v.size() != 2) throw ConfigError("scenario.stay: expected two probabilities");
    s.stay = {v[0], v[1]};
  }
  if (j.contains("regimes")) {
    const auto& r = j.at("regimes");
    if (!r.is_array() || r.size() != 2) throw ConfigError("scenario.regimes: expected two regimes");
    s.regimes[0] = parse_regime(r[0], s.regimes[0], "scenario.regimes[0]");
    s.regimes[1] = parse_regime(r[1], s.regimes[1], "scenario.regimes[1]");
  }
  s.start_state = get<int>(j, "start_state", s.start_state, w);
  s.volume_sigma = get<double>(j, "volume_sigma", s.volume_sigma, w);
  s.spread_noise = get<double>(j, "spread_noise", s.spread_noise, w);
  s.signal_strength = get<double>(j, "signal_strength", s.signal_strength, w);
  s.signal_phi = get<double>(j, "signal_phi", s.signal_phi, w);
  s.seed = get<std::uint64_t>(j, "seed", s.seed, w);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::string RunConfig::stress_method() const {
  if (!stress.method.empty()) return stress.method;
  for (const auto& m : walk_forward.methods)
    if (m.id != reference) return m.id;
  return reference;
}

std::string RunConfig::drift_candidate() const {
  if (!drift.candidate.empty()) return drift.candidate;
  return stress_method();
}

RunConfig parse_run_config(const json& doc) {
  check_keys(doc, {"seed", "symbol", "output_dir", "scenario", "market_csv", "latent_csv", "walk_forward", "methods",
                   "reference", "decision", "friction", "uwc", "grid", "inference", "stress", "cost_grid", "drift",
                   "placebo"},
             "config");
  RunConfig c;
  c.document = doc;
  c.seed = get<std::uint64_t>(doc, "seed", c.seed, "config");
  c.symbol = get<std::string>(doc, "symbol", c.symbol, "config");
  if (c.symbol.empty() || c.symbol.find(',') != std::string::npos) throw ConfigError("config.symbol: must be non-empty and comma-free");
  c.output_dir = get<std::string>(doc, "output_dir", c.output_dir, "config");
  c.market_csv = get<std::string>(doc, "market_csv", "", "config");
  c.latent_csv = get<std::string>(doc, "latent_csv", "", "config");
  if (doc.contains("scenario")) c.scenario = parse_scenario(doc.at("scenario"));
  if (!c.scenario && c.market_csv.empty()) throw ConfigError("config: need either 'scenario' or 'market_csv'");

  auto& wf = c.walk_forward;
  if (doc.contains("walk_forward")) {
    const auto& j = doc.at("walk_forward");
    const std::string w = "walk_forward";
    check_keys(j, {"t_train", "t_val", "t_test", "embargo", "horizon", "refit", "refit_interval", "warp_lambdas",
                   "ewma_lambdas"},
               w);
    wf.t_train = get<std::size_t>(j, "t_train", wf.t_train, w);
    wf.t_val = get<std::size_t>(j, "t_val", wf.t_val, w);
    wf.t_test = get<std::size_t>(j, "t_test", wf.t_test, w);
    wf.embargo = get<std::size_t>(j, "embargo", wf.embargo, w);
    wf.horizon = get<std::size_t>(j, "horizon", wf.horizon, w);
    auto refit = get<std::string>(j, "refit", "rolling", w);
    if (refit == "rolling")
      wf.refit = RefitScheme::rolling;
    else if (refit == "expanding")
      wf.refit = RefitScheme::expanding;
    else
      throw ConfigError("walk_forward.refit: expected rolling or expanding");
    wf.refit_interval = get<std::size_t>(j, "refit_interval", wf.refit_interval, w);
    wf.warp_lambdas = get<std::vector<double>>(j, "warp_lambdas", wf.warp_lambdas, w);
    wf.ewma_lambdas = get<std::vector<double>>(j, "ewma_lambdas", wf.ewma_lambdas, w);
  }
  if (!doc.contains("methods") || !doc.at("methods").is_array()) throw ConfigError("config.methods: expected an array");
  for (std::size_t i = 0; i < doc.at("methods").size(); ++i) {
    const auto& j = doc.at("methods")[i];
    const std::string w = "methods[" + std::to_string(i) + "]";
    check_keys(j, {"id", "forecaster", "calibration"}, w);
    MethodSpec m;
    m.id = get<std::string>(j, "id", "", w);
    m.forecaster = parse_forecaster(j.value("forecaster", json::object()), w + ".forecaster");
    m.calibration = calibration_kind_from(get<std::string>(j, "calibration", "none", w));
    wf.methods.push_back(m);
  }
  c.reference = get<std::string>(doc, "reference", wf.methods.empty() ? "" : wf.methods.front().id, "config");

  auto& dc = c.decision;
  if (doc.contains("decision")) {
    const auto& j = doc.at("decision");
    const std::string w = "decision";
    check_keys(j, {"gamma", "position_bound", "turnover_cap", "leverage_cap", "participation_cap",
                   "planning_eta_quad", "utility", "risk_aversion", "kappa_profile", "kappa_window"},
               w);
    dc.gamma = get<double>(j, "gamma", dc.gamma, w);
    dc.position_bound = get<double>(j, "position_bound", dc.position_bound, w);
    dc.turnover_cap = get<double>(j, "turnover_cap", dc.turnover_cap, w);
    dc.leverage_cap = get<double>(j, "leverage_cap", dc.leverage_cap, w);
    if (j.contains("participation_cap") && !j.at("participation_cap").is_null())
      dc.participation_cap = get<double>(j, "participation_cap", 0.0, w);
    dc.planning_eta_quad = get<double>(j, "planning_eta_quad", dc.planning_eta_quad, w);
    auto u = get<std::string>(j, "utility", "linear", w);
    if (u == "linear")
      dc.utility.kind = UtilityKind::linear;
    else if (u == "mean_variance")
      dc.utility.kind = UtilityKind::mean_variance;
    else
      throw ConfigError("decision.utility: expected linear or mean_variance");
    dc.utility.risk_aversion = get<double>(j, "risk_aversion", 0.0, w);
    auto kp = get<std::string>(j, "kappa_profile", "constant", w);
    if (kp == "constant")
      dc.kappa_profile = KappaProfile::constant;
    else if (kp == "tail_boost")
      dc.kappa_profile = KappaProfile::tail_boost;
    else
      throw ConfigError("decision.kappa_profile: expected constant or tail_boost");
    dc.kappa_window = get<std::size_t>(j, "kappa_window", dc.kappa_window, w);
  }
  if (doc.contains("friction")) {
    const auto& j = doc.at("friction");
    const std::string w = "friction";
    check_keys(j, {"fee_rate", "fixed_spread", "impact", "impact_coeff", "cost_multiplier"}, w);
    auto& f = dc.friction;
    f.fee_rate = get<double>(j, "fee_rate", f.fee_rate, w);
    if (j.contains("fixed_spread") && !j.at("fixed_spread").is_null()) f.fixed_spread = get<double>(j, "fixed_spread", 0.0, w);
    auto imp = get<std::string>(j, "impact", "quadratic", w);
    if (imp == "quadratic")
      f.impact_kind = ImpactKind::quadratic;
    else if (imp == "sqrt_participation")
      f.impact_kind = ImpactKind::sqrt_participation;
    else
      throw ConfigError("friction.impact: expected quadratic or sqrt_participation");
    f.impact_coeff = get<double>(j, "impact_coeff", f.impact_coeff, w);
    f.cost_multiplier = get<double>(j, "cost_multiplier", f.cost_multiplier, w);
  }
  if (doc.contains("uwc")) {
    const auto& j = doc.at("uwc");
    const std::string w = "uwc";
    check_keys(j, {"lambda", "min_window", "max_iterations", "gradient_tolerance", "weight_scaling", "bandwidths"}, w);
    auto& u = dc.uwc;
    u.lambda = get<double>(j, "lambda", u.lambda, w);
    u.min_window = get<std::size_t>(j, "min_window", u.min_window, w);
    u.max_iterations = get<int>(j, "max_iterations", u.max_iterations, w);
    u.gradient_tolerance = get<double>(j, "gradient_tolerance", u.gradient_tolerance, w);
    auto sc = get<std::string>(j, "weight_scaling", "mean_one", w);
    if (sc == "mean_one")
      u.scaling = WeightScaling::mean_one;
    else if (sc == "none")
      u.scaling = WeightScaling::none;
    else
      throw ConfigError("uwc.weight_scaling: expected mean_one or none");
    u.bandwidths = get<std::vector<double>>(j, "bandwidths", u.bandwidths, w);
  }
  if (doc.contains("grid")) {
    const auto& j = doc.at("grid");
    check_keys(j, {"points"}, "grid");
    dc.grid.points = get<std::vector<double>>(j, "points", dc.grid.points, "grid");
  }
  if (doc.contains("inference")) {
    const auto& j = doc.at("inference");
    check_keys(j, {"n_boot", "fdr_q", "periods_per_year"}, "inference");
    c.inference.n_boot = get<std::size_t>(j, "n_boot", c.inference.n_boot, "inference");
    c.inference.fdr_q = get<double>(j, "fdr_q", c.inference.fdr_q, "inference");
    c.inference.periods_per_year = get<double>(j, "periods_per_year", c.inference.periods_per_year, "inference");
  }
  if (doc.contains("stress")) {
    const auto& j = doc.at("stress");
    check_keys(j, {"mean_shift_sd", "cost_multiplier", "vol_multiplier", "method"}, "stress");
    c.stress.mean_shift_sd = get<double>(j, "mean_shift_sd", c.stress.mean_shift_sd, "stress");
    c.stress.cost_multiplier = get<double>(j, "cost_multiplier", c.stress.cost_multiplier, "stress");
    c.stress.vol_multiplier = get<double>(j, "vol_multiplier", c.stress.vol_multiplier, "stress");
    c.stress.method = get<std::string>(j, "method", "", "stress");
  }
  c.cost_grid = get<std::vector<double>>(doc, "cost_grid", c.cost_grid, "config");
  if (doc.contains("drift")) {
    const auto& j = doc.at("drift");
    check_keys(j, {"window", "threshold", "persistence", "candidate"}, "drift");
    c.drift.window = get<std::size_t>(j, "window", c.drift.window, "drift");
    c.drift.threshold = get<double>(j, "threshold", c.drift.threshold, "drift");
    c.drift.persistence = get<std::size_t>(j, "persistence", c.drift.persistence, "drift");
    c.drift.candidate = get<std::string>(j, "candidate", "", "drift");
  }
  if (doc.contains("placebo")) {
    const auto& j = doc.at("placebo");
    check_keys(j, {"mode", "shift"}, "placebo");
    auto mode = get<std::string>(j, "mode", "none", "placebo");
    if (mode == "none")
      c.placebo.mode = PlaceboMode::none;
    else if (mode == "shuffle_within_block")
      c.placebo.mode = PlaceboMode::shuffle_within_block;
    else if (mode == "time_shift")
      c.placebo.mode = PlaceboMode::time_shift;
    else
      throw ConfigError("placebo.mode: expected none, shuffle_within_block or time_shift");
    c.placebo.shift = get<std::size_t>(j, "shift", 0, "placebo");
  }

  try {
    wf.validate();
    dc.validate();
    for (const auto& s : model_risk_set(c.stress.mean_shift_sd, c.stress.cost_multiplier, c.stress.vol_multiplier))
      s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto has_method = [&](const std::string& id) {
    return std::any_of(wf.methods.begin(), wf.methods.end(), [&](const MethodSpec& m) { return m.id == id; });
  };
  if (!has_method(c.reference)) throw ConfigError("config.reference: no method with id '" + c.reference + "'");
  if (!c.stress.method.empty() && !has_method(c.stress.method)) throw ConfigError("stress.method: unknown method id");
  if (!c.drift.candidate.empty() && !has_method(c.drift.candidate)) throw ConfigError("drift.candidate: unknown method id");
  if (c.inference.n_boot < 200) throw ConfigError("inference.n_boot must be >= 200");
  if (!(c.inference.fdr_q > 0.0 && c.inference.fdr_q < 1.0)) throw ConfigError("inference.fdr_q must lie in (0,1)");
  if (c.drift.window < 30) throw ConfigError("drift.window must be >= 30");
  for (double m : c.cost_grid)
    if (!(m > 0.0)) throw ConfigError("cost_grid: multipliers must be positive");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

std::string config_hash(const json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

json defaults_in_force(const RunConfig& c) {
  const auto& wf = c.walk_forward;
  const auto& dc = c.decision;
  json methods = json::array();
  for (const auto& m : wf.methods)
    methods.push_back({{"id", m.id}, {"forecaster", forecaster_json(m.forecaster)}, {"calibration", to_string(m.calibration)}});
  return {
      {"rng", CounterRng::algorithm_id},
      {"walk_forward",
       {{"t_train", wf.t_train},
        {"t_val", wf.t_val},
        {"t_test", wf.t_test},
        {"embargo", wf.embargo},
        {"horizon", wf.horizon},
        {"refit", wf.refit == RefitScheme::rolling ? "rolling" : "expanding"},
        {"refit_interval", wf.refit_interval},
        {"warp_lambdas", wf.warp_lambdas},
        {"ewma_lambdas", wf.ewma_lambdas},
        {"selection", "minimum mean validation decision loss, first index on ties"}}},
      {"methods", methods},
      {"reference", c.reference},
      {"decision",
       {{"gamma", dc.gamma},
        {"position_bound", dc.position_bound},
        {"turnover_cap", dc.turnover_cap},
        {"leverage_cap", dc.leverage_cap},
        {"participation_cap", dc.participation_cap ? json(*dc.participation_cap) : json(nullptr)},
        {"planning_eta_quad", dc.planning_eta_quad},
        {"utility", dc.utility.kind == UtilityKind::linear ? "linear" : "mean_variance"},
        {"risk_aversion", dc.utility.risk_aversion},
        {"kappa_profile", dc.kappa_profile == KappaProfile::constant ? "constant" : "tail_boost"},
        {"kappa_window", dc.kappa_window},
        {"variance_floor", 1e-16},
        {"friction_state_timing", "spread, volatility and volume at t known when deciding w_t"}}},
      {"friction",
       {{"fee_rate", dc.friction.fee_rate},
        {"fixed_spread", dc.friction.fixed_spread ? json(*dc.friction.fixed_spread) : json(nullptr)},
        {"impact", dc.friction.impact_kind == ImpactKind::quadratic ? "quadratic" : "sqrt_participation"},
        {"impact_coeff", dc.friction.impact_coeff},
        {"cost_multiplier", dc.friction.cost_multiplier}}},
      {"solver",
       {{"method", "proximal gradient, exact separable prox, Dykstra splitting for coupled constraints"},
        {"max_iterations", dc.solver.max_iterations},
        {"kkt_tolerance", dc.solver.tolerance},
        {"step_tolerance", dc.solver.step_tolerance},
        {"fallback", "previous weights when the gradient-mapping residual exceeds the tolerance"},
        {"infeasible", "turnover cap relaxed"}}},
      {"uwc",
       {{"knots", {0.0, 0.25, 0.5, 0.75, 1.0}},
        {"interpolation", "piecewise linear"},
        {"lambda", dc.uwc.lambda},
        {"min_window", dc.uwc.min_window},
        {"max_iterations", dc.uwc.max_iterations},
        {"gradient_tolerance", dc.uwc.gradient_tolerance},
        {"weight_scaling", dc.uwc.scaling == WeightScaling::mean_one ? "mean_one" : "none"},
        {"bandwidths", dc.uwc.bandwidths},
        {"grid", dc.grid.points}}},
      {"inference",
       {{"n_boot", c.inference.n_boot},
        {"fdr_q", c.inference.fdr_q},
        {"periods_per_year", c.inference.periods_per_year},
        {"block_length_rule", "max(h, ceil(T^(1/3)))"},
        {"hac_bandwidth_rule", "floor(4 (T/100)^(2/9))"},
        {"ci", "percentile"},
        {"sd_divisor", "T"}}},
      {"stress",
       {{"mean_shift_sd", c.stress.mean_shift_sd},
        {"cost_multiplier", c.stress.cost_multiplier},
        {"vol_multiplier", c.stress.vol_multiplier},
        {"method", c.stress_method()},
        {"applied_to", "calibrated forecast, frozen calibrators and hyperparameters"}}},
      {"cost_grid", c.cost_grid},
      {"drift",
       {{"window", c.drift.window},
        {"threshold", c.drift.threshold},
        {"persistence", c.drift.persistence},
        {"candidate", c.drift_candidate()}}},
  };
}

MarketData load_market(const RunConfig& cfg, const std::filesystem::path& base) {
  MarketData d;
  d.symbol = cfg.symbol;
  if (!cfg.market_csv.empty()) {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path q(p);
      return q.is_absolute() || base.empty() ? q : base / q;
    };
    d.market = parse_market_csv(read_file(resolve(cfg.market_csv)));
    if (!cfg.latent_csv.empty()) {
      d.latent = parse_latent_csv(read_file(resolve(cfg.latent_csv)));
      if (d.latent->signal.size() != d.market.size()) throw DataError("latent CSV length differs from market CSV");
    }
    return d;
  }
  Scenario sc = generate(*cfg.scenario);
  d.market = std::move(sc.market);
  d.latent = LatentSeries{std::move(sc.signal), std::move(sc.true_sd), std::move(sc.regime)};
  return d;
}

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json endpoints_json(const EndpointSummary& e) {
  json regimes = json::array();
  for (double v : e.regime_mean_loss) regimes.push_back(num(v));
  return {{"n", e.n},
          {"mean_loss", e.mean_loss},
          {"mean_net", e.mean_net},
          {"mean_turnover", e.mean_turnover},
          {"mean_cost", e.mean_cost},
          {"constraint_freq", e.constraint_freq},
          {"sharpe_annualised", num(e.sharpe_annualised)},
          {"cvar_5", e.cvar_5},
          {"max_drawdown", e.max_drawdown},
          {"regime_mean_loss", regimes}};
}

}  // namespace

const MethodRun& find_run(const WalkForwardResult& res, const std::string& id) {
  for (const auto& r : res.runs)
    if (r.spec.id == id) return r;
  throw std::invalid_argument("no method with id '" + id + "'");
}

json summarize(const RunConfig& cfg, const WalkForwardResult& res) {
  json out;
  out["version"] = UWC_VERSION;
  out["rng"] = CounterRng::algorithm_id;
  out["seed"] = cfg.seed;
  out["config_hash"] = config_hash(cfg.document);
  out["reference"] = cfg.reference;
  json layout = json::array();
  for (const auto& L : res.layout)
    layout.push_back({{"test_start", L.test_start}, {"test_end", L.test_end}, {"val_start", L.val_start},
                      {"val_end", L.val_end}, {"calibration_from", L.final_from}, {"calibration_to", L.final_to}});
  out["blocks"] = layout;

  json methods = json::object();
  for (const auto& run : res.runs) {
    auto rows = method_rows(res.panel, run.spec.id);
    json m = endpoints_json(endpoints(rows, cfg.inference.periods_per_year));
    m["calibration"] = to_string(run.spec.calibration);
    m["forecaster"] = forecaster_json(run.spec.forecaster);
    m["planned_cost_mean"] = run.mean_planned_cost;
    m["realized_cost_mean"] = run.mean_realized_cost;
    m["cost_wedge_mean"] = run.mean_realized_cost - run.mean_planned_cost;
    std::map<std::string, std::size_t> status;
    for (const auto& r : rows) ++status[r.solver_status];
    m["solver_status"] = status;
    json blocks = json::array();
    for (const auto& b : run.blocks) {
      json vl = json::array();
      for (double v : b.validation_losses) vl.push_back(v);
      blocks.push_back({{"block", b.block},
                        {"warp_lambda", b.selected.warp_lambda},
                        {"ewma_lambda", b.selected.ewma_lambda},
                        {"validation_losses", vl},
                        {"warning", b.warning}});
    }
    m["selection"] = blocks;
    methods[run.spec.id] = m;
  }
  out["methods"] = methods;

  std::vector<std::string> others;
  std::vector<std::vector<double>> diffs;
  for (const auto& run : res.runs)
    if (run.spec.id != cfg.reference) {
      others.push_back(run.spec.id);
      diffs.push_back(paired_differential(res.panel, run.spec.id, cfg.reference));
    }
  json tests = json::array();
  if (!others.empty()) {
    const std::size_t T = diffs.front().size();
    const std::size_t b = default_block_length(T, cfg.walk_forward.horizon);
    MaxTResult mt = maxT_fwer(diffs, b, cfg.inference.n_boot, cfg.seed);
    std::vector<double> raw;
    std::vector<TestReport> reps;
    for (std::size_t i = 0; i < others.size(); ++i) {
      reps.push_back(test_report(diffs[i], cfg.walk_forward.horizon, cfg.inference.n_boot, cfg.seed));
      raw.push_back(reps.back().p_one_sided);
    }
    auto bh = bh_fdr(raw, cfg.inference.fdr_q);
    const auto& kap = method_rows(res.panel, cfg.reference);
    std::vector<double> kappa;
    for (const auto& r : kap) kappa.push_back(r.kappa);
    for (std::size_t i = 0; i < others.size(); ++i) {
      const auto& r = reps[i];
      std::vector<double> benefit(diffs[i].size());
      for (std::size_t t = 0; t < benefit.size(); ++t) benefit[t] = -diffs[i][t];
      RegimeSplit rs = regime_split(benefit, kappa);
      json terc = json::array();
      for (const auto& ts : rs.tercile)
        terc.push_back({{"n", ts.n}, {"mean", num(ts.mean)}, {"hac_se", num(ts.hac_se)}, {"t_stat", num(ts.t_stat)}});
      tests.push_back({{"method", others[i]},
                       {"reference", cfg.reference},
                       {"mean", r.mean},
                       {"hac_se", r.hac_se},
                       {"t_stat", num(r.t_stat)},
                       {"ci_lower", r.ci_lower},
                       {"ci_upper", r.ci_upper},
                       {"p_one_sided", r.p_one_sided},
                       {"maxT_raw_p", mt.raw_p[i]},
                       {"adjusted_p_fwer", std::max(mt.adjusted_p[i], r.p_one_sided)},
                       {"bh_reject", static_cast<bool>(bh[i])},
                       {"block_length", r.block_length},
                       {"n_boot", r.n_boot},
                       {"regime_benefit",
                        {{"kappa_lower", rs.lower_bound},
                         {"kappa_upper", rs.upper_bound},
                         {"degenerate", rs.degenerate},
                         {"terciles", terc}}}});
    }
  }
  out["differentials"] = tests;
  return out;
}

std::vector<StressResult> run_stress(WalkForwardEngine& engine, const MethodRun& run,
                                     const std::vector<StressScenario>& scenarios) {
  std::vector<StressResult> out;
  double baseline = 0.0;
  bool have_base = false;
  for (const auto& sc : scenarios) {
    auto rows = engine.replay(run, sc);
    double loss = endpoints(rows).mean_loss;
    if (sc.is_identity() && !have_base) {
      baseline = loss;
      have_base = true;
    }
    out.push_back({sc, loss, 0.0, 1.0});
  }
  if (!have_base) baseline = endpoints(engine.replay(run, StressScenario{})).mean_loss;
  for (auto& r : out) {
    r.baseline_loss = baseline;
    r.multiplier = stress_multiplier(r.expected_loss, baseline);
  }
  return out;
}

std::vector<CostGridRow> run_cost_grid(WalkForwardEngine& engine, const MethodRun& run,
                                       const std::vector<double>& multipliers) {
  std::vector<CostGridRow> out;
  for (double m : multipliers) {
    StressScenario sc{"cost_x" + format_double(m), 0.0, m, 1.0};
    auto e = endpoints(engine.replay(run, sc));
    out.push_back({m, e.mean_net, e.mean_loss, e.mean_turnover});
  }
  return out;
}

std::string cost_grid_csv(const std::vector<CostGridRow>& rows) {
  std::string out = "cost_multiplier,mean_net_return,mean_loss,mean_turnover\n";
  for (const auto& r : rows)
    out += format_double(r.multiplier) + "," + format_double(r.mean_net) + "," + format_double(r.mean_loss) + "," +
           format_double(r.mean_turnover) + "\n";
  return out;
}

}  // namespace uwc
