// Command-line driver: simulate | evaluate | stress | monitor | report.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uwc/experiment.hpp"
#include "uwc/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uwc;

namespace {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_dir(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("UWC_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

std::string file_hash(const std::string& content) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(content)));
  return buf;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

struct Stage {
  std::string name;
  RunConfig cfg;
  fs::path out;
  json outputs = json::object();
  json inputs = json::object();

  void emit(const std::string& file, const std::string& content) {
    write_atomic(out / file, content);
    outputs[file] = file_hash(content);
  }

  void finish() {
    json m;
    m["stage"] = name;
    m["version"] = UWC_VERSION;
    m["seed"] = cfg.seed;
    m["config_hash"] = config_hash(cfg.document);
    m["config"] = cfg.document;
    m["defaults"] = defaults_in_force(cfg);
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_atomic(out / ("manifest_" + name + ".json"), m.dump(2) + "\n");
  }
};

/// Loads the config either directly or from the manifest of a prior stage.
RunConfig resolve_config(const std::string& config_path, const std::string& manifest_path, json* manifest,
                         fs::path* manifest_dir) {
  if (!manifest_path.empty()) {
    *manifest = read_json(manifest_path);
    *manifest_dir = fs::absolute(fs::path(manifest_path)).parent_path();
    if (!manifest->contains("config")) throw DataError("manifest has no embedded config");
    RunConfig cfg = parse_run_config(manifest->at("config"));
    if (manifest->value("stage", "") == "simulate") {
      cfg.market_csv = (*manifest_dir / "market.csv").string();
      cfg.latent_csv = (*manifest_dir / "latent.csv").string();
      cfg.document["market_csv"] = cfg.market_csv;
      cfg.document["latent_csv"] = cfg.latent_csv;
    }
    if (!config_path.empty()) throw ConfigError("pass either --config or --manifest, not both");
    return cfg;
  }
  if (config_path.empty()) throw ConfigError("one of --config or --manifest is required");
  *manifest_dir = fs::absolute(fs::path(config_path)).parent_path();
  return load_run_config(config_path);
}

void check_finite_panel(const EvaluationPanel& p) {
  for (const auto& r : p)
    if (!std::isfinite(r.decision_loss) || !std::isfinite(r.net_return))
      throw NumericalError("non-finite decision loss at timestamp " + std::to_string(r.timestamp));
}

int cmd_simulate(const std::string& config, const std::string& out_flag) {
  RunConfig cfg = load_run_config(config);
  if (!cfg.scenario) throw ConfigError("simulate requires a 'scenario' section");
  Stage st{"simulate", cfg, output_dir(out_flag, cfg)};
  Scenario sc = generate(*cfg.scenario);
  st.emit("market.csv", market_csv(sc.market));
  st.emit("latent.csv", latent_csv(sc.market, LatentSeries{sc.signal, sc.true_sd, sc.regime}));
  st.inputs["scenario_kind"] = to_string(sc.spec.kind);
  st.finish();
  std::cout << "simulate: " << sc.market.size() << " periods -> " << st.out.string() << "\n";
  return 0;
}

struct Evaluated {
  RunConfig cfg;
  fs::path base;
  std::unique_ptr<WalkForwardEngine> engine;
  WalkForwardResult result;
};

Evaluated evaluate(const std::string& config, const std::string& manifest) {
  Evaluated ev;
  json m;
  ev.cfg = resolve_config(config, manifest, &m, &ev.base);
  MarketData data = load_market(ev.cfg, ev.base);
  ev.engine = std::make_unique<WalkForwardEngine>(std::move(data), ev.cfg.walk_forward, ev.cfg.decision, ev.cfg.seed,
                                                  ev.cfg.placebo);
  ev.result = ev.engine->run();
  check_finite_panel(ev.result.panel);
  return ev;
}

int cmd_evaluate(const std::string& config, const std::string& manifest, const std::string& out_flag) {
  Evaluated ev = evaluate(config, manifest);
  Stage st{"evaluate", ev.cfg, output_dir(out_flag, ev.cfg)};
  st.inputs["market_csv"] = ev.cfg.market_csv;
  st.inputs["latent_csv"] = ev.cfg.latent_csv;
  st.emit("panel.csv", panel_csv(ev.result.panel));
  st.emit("summary.json", summarize(ev.cfg, ev.result).dump(2) + "\n");
  st.finish();
  std::cout << "evaluate: " << ev.result.panel.size() << " panel rows, " << ev.result.layout.size()
            << " blocks -> " << st.out.string() << "\n";
  return 0;
}

int cmd_stress(const std::string& config, const std::string& manifest, const std::string& out_flag) {
  Evaluated ev = evaluate(config, manifest);
  const MethodRun& run = find_run(ev.result, ev.cfg.stress_method());
  auto table = run_stress(*ev.engine, run,
                          model_risk_set(ev.cfg.stress.mean_shift_sd, ev.cfg.stress.cost_multiplier,
                                         ev.cfg.stress.vol_multiplier));
  auto grid = run_cost_grid(*ev.engine, run, ev.cfg.cost_grid);
  Stage st{"stress", ev.cfg, output_dir(out_flag, ev.cfg)};
  st.inputs["manifest"] = manifest;
  st.inputs["method"] = run.spec.id;
  st.emit("stress.csv", stress_csv(table));
  st.emit("cost_grid.csv", cost_grid_csv(grid));
  std::size_t worst = worst_case(table);
  json w = {{"method", run.spec.id}, {"worst_case", table[worst].scenario.name},
            {"worst_case_loss", table[worst].expected_loss}};
  st.emit("stress_summary.json", w.dump(2) + "\n");
  st.finish();
  std::cout << "stress: worst case '" << table[worst].scenario.name << "' -> " << st.out.string() << "\n";
  return 0;
}

int cmd_monitor(const std::string& manifest, const std::string& out_flag) {
  if (manifest.empty()) throw ConfigError("monitor requires --manifest of an evaluate run");
  json m;
  fs::path base;
  RunConfig cfg = resolve_config("", manifest, &m, &base);
  EvaluationPanel panel = parse_panel_csv(read_file(base / "panel.csv"));
  if (panel.empty()) throw DataError("panel.csv has no rows");
  const std::string cand = cfg.drift_candidate();
  auto d = paired_differential(panel, cand, cfg.reference);
  DriftStatistic drift = drift_monitor(d, cfg.drift.window, cfg.drift.threshold, cfg.drift.persistence);
  std::vector<std::int64_t> ts;
  for (const auto& r : method_rows(panel, cand)) ts.push_back(r.timestamp);
  Stage st{"monitor", cfg, output_dir(out_flag, cfg)};
  st.inputs["manifest"] = manifest;
  st.emit("drift.csv", drift_csv(ts, drift));
  json events = json::array();
  for (auto i : drift.breach_events) events.push_back(ts[i]);
  json s = {{"candidate", cand},
            {"reference", cfg.reference},
            {"window", drift.window},
            {"threshold", drift.threshold},
            {"persistence", drift.persistence},
            {"breach_events", events},
            {"breach_frequency", drift.breach_frequency}};
  st.emit("drift_summary.json", s.dump(2) + "\n");
  st.finish();
  std::cout << "monitor: " << drift.breach_events.size() << " breach events -> " << st.out.string() << "\n";
  return 0;
}

std::string fmt(const json& v, int prec = 6) {
  if (v.is_null()) return "nan";
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (!v.is_number()) return v.dump();
  std::ostringstream s;
  s.precision(prec);
  s << v.get<double>();
  return s.str();
}

int cmd_report(const std::string& manifest, const std::string& out_flag) {
  if (manifest.empty()) throw ConfigError("report requires --manifest of an evaluate run");
  json m;
  fs::path base;
  RunConfig cfg = resolve_config("", manifest, &m, &base);
  EvaluationPanel panel = parse_panel_csv(read_file(base / "panel.csv"));
  if (panel.empty()) throw DataError("panel.csv has no rows; nothing to report");
  json s = read_json(base / "summary.json");

  std::ostringstream r;
  r << "# Run report\n\nconfig " << s.value("config_hash", "") << ", seed " << s.value("seed", 0) << "\n\n";
  r << "## Main results by method\n\n| method | mean loss | mean net | turnover | constraint freq | Sharpe | CVaR 5% | max DD |\n"
       "|---|---|---|---|---|---|---|---|\n";
  for (const auto& [id, e] : s.at("methods").items())
    r << "| " << id << " | " << fmt(e["mean_loss"]) << " | " << fmt(e["mean_net"]) << " | "
      << fmt(e["mean_turnover"]) << " | " << fmt(e["constraint_freq"]) << " | " << fmt(e["sharpe_annualised"])
      << " | " << fmt(e["cvar_5"]) << " | " << fmt(e["max_drawdown"]) << " |\n";
  r << "\n## Paired loss differentials (method - reference)\n\n| method | mean | HAC se | t | 95% CI | p | FWER p | BH |\n"
       "|---|---|---|---|---|---|---|---|\n";
  for (const auto& d : s.at("differentials"))
    r << "| " << d["method"].get<std::string>() << " | " << fmt(d["mean"]) << " | " << fmt(d["hac_se"]) << " | "
      << fmt(d["t_stat"]) << " | [" << fmt(d["ci_lower"]) << ", " << fmt(d["ci_upper"]) << "] | "
      << fmt(d["p_one_sided"]) << " | " << fmt(d["adjusted_p_fwer"]) << " | " << fmt(d["bh_reject"]) << " |\n";
  r << "\n## Benefit over the reference by friction tercile\n\n| method | low | mid | high |\n|---|---|---|---|\n";
  for (const auto& d : s.at("differentials")) {
    r << "| " << d["method"].get<std::string>();
    for (const auto& t : d["regime_benefit"]["terciles"])
      r << " | " << fmt(t["mean"]) << " (t " << fmt(t["t_stat"], 3) << ")";
    r << " |\n";
  }
  if (fs::exists(base / "stress.csv")) r << "\n## Model risk set\n\n```\n" << read_file(base / "stress.csv") << "```\n";
  if (fs::exists(base / "cost_grid.csv"))
    r << "\n## Cost sensitivity\n\n```\n" << read_file(base / "cost_grid.csv") << "```\n";
  if (fs::exists(base / "drift_summary.json")) {
    json d = read_json(base / "drift_summary.json");
    r << "\n## Drift monitor\n\nbreach frequency " << fmt(d["breach_frequency"]) << ", events "
      << d["breach_events"].size() << "\n";
  }
  Stage st{"report", cfg, output_dir(out_flag, cfg)};
  st.inputs["manifest"] = manifest;
  st.emit("report.md", r.str());
  st.finish();
  std::cout << r.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utility-weighted calibration pipeline"};
  app.set_version_flag("--version", std::string(UWC_VERSION));
  app.require_subcommand(1);
  std::string config, manifest, out;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic market");
  sim->add_option("--config", config, "run configuration (JSON)")->required();
  sim->add_option("--out", out, "output directory");

  auto* eva = app.add_subcommand("evaluate", "run the walk-forward evaluation");
  auto* stress = app.add_subcommand("stress", "model-risk set and cost grid on a completed configuration");
  for (auto* sc : {eva, stress}) {
    sc->add_option("--config", config, "run configuration (JSON)");
    sc->add_option("--manifest", manifest, "manifest of a prior stage");
    sc->add_option("--out", out, "output directory");
  }
  auto* mon = app.add_subcommand("monitor", "drift statistic on the evaluated panel");
  auto* rep = app.add_subcommand("report", "tables from the evaluated summary");
  for (auto* sc : {mon, rep}) {
    sc->add_option("--manifest", manifest, "manifest of the evaluate stage")->required();
    sc->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(config, out);
    if (*eva) return cmd_evaluate(config, manifest, out);
    if (*stress) return cmd_stress(config, manifest, out);
    if (*mon) return cmd_monitor(manifest, out);
    if (*rep) return cmd_report(manifest, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const LeakageError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
