// ragtune command-line front end: grid-search oracles, online tuning runs,
// ablation sweeps, base-model switch studies, replay validation, synthetic
// landscape generation and the suggest/report sidecar.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ragtune/harness.hpp"
#include "ragtune/landscape.hpp"
#include "ragtune/remote.hpp"
#include "ragtune/replay.hpp"
#include "ragtune/results_io.hpp"
#include "ragtune/service_http.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ragtune;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEnvironment = 3;
constexpr int kExitValidation = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path);
  json parsed = json::parse(f, nullptr, false);
  if (parsed.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  if (!parsed.is_object()) throw ConfigError("config file must hold a JSON object: " + path);
  return parsed;
}

void reject_unknown_keys(const json& config) {
  static const std::vector<std::string> known{
      "method",       "space",        "environment", "reward",          "T",
      "B",            "alpha",        "alpha_h",     "alpha_l",         "obs_variance",
      "update_scope", "seed",         "n_seeds",     "recall_x",        "checkpoint_every",
      "initial_config", "sweep",      "switch",      "out",             "parallel"};
  for (const auto& [key, _] : config.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
}

HyperParamSpace space_from_config(const json& config) {
  if (!config.contains("space")) return default_rag_space(true);
  const json& s = config["space"];
  if (s.is_string()) {
    const std::string name = s.get<std::string>();
    if (name == "rag3") return default_rag_space(true);
    if (name == "rag2") return default_rag_space(false);
    throw ConfigError("unknown space preset '" + name + "' (expected rag2|rag3 or an inline space object)");
  }
  try {
    return space_from_json(s);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config key 'space': ") + e.what());
  }
}

DatasetProfile profile_from_name(const std::string& name) {
  if (name == "asqa-like") return asqa_like_profile();
  if (name == "nq-like") return nq_like_profile();
  throw ConfigError("unknown profile '" + name + "' (expected asqa-like|nq-like)");
}

struct BuiltEnvironment {
  std::unique_ptr<Environment> env;
  std::optional<RewardParams> reference;  // landscape reference params, if any
};

BuiltEnvironment build_environment(const json& spec, const HyperParamSpace& space) {
  if (!spec.is_object() || !spec.contains("type")) throw ConfigError("environment spec needs a 'type'");
  const std::string type = spec.at("type").get<std::string>();
  static const std::vector<std::string> replay_keys{"type", "csv", "manifest"};
  static const std::vector<std::string> landscape_keys{"type",   "file",        "regime",      "seed",
                                                       "profile", "noise_std",  "reference_w", "penalty_threshold"};
  static const std::vector<std::string> remote_keys{"type", "host", "port", "path", "t_max", "max_retries"};

  auto check_keys = [&](const std::vector<std::string>& known) {
    for (const auto& [key, _] : spec.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigError("unknown environment key '" + key + "' for type '" + type + "'");
  };

  BuiltEnvironment out;
  if (type == "replay") {
    check_keys(replay_keys);
    if (!spec.contains("csv")) throw ConfigError("replay environment needs 'csv'");
    ReplayTable table = [&] {
      try {
        return load_replay(spec.at("csv").get<std::string>(),
                           spec.contains("manifest") ? spec.at("manifest").get<std::string>() : "");
      } catch (const std::exception& e) {
        throw EnvironmentError(e.what());
      }
    }();
    if (!(table.space() == space))
      throw ConfigError("replay table's space does not match the configured space");
    out.env = std::make_unique<ReplayEnvironment>(std::move(table));
  } else if (type == "landscape") {
    LandscapeModel model;
    if (spec.contains("file")) {
      check_keys({"type", "file"});
      try {
        model = load_landscape(spec.at("file").get<std::string>());
      } catch (const std::exception& e) {
        throw EnvironmentError(e.what());
      }
      if (!(model.space == space)) throw ConfigError("landscape file's space does not match the configured space");
    } else {
      check_keys(landscape_keys);
      if (!spec.contains("regime")) throw ConfigError("landscape environment needs 'regime' or 'file'");
      LandscapeOptions opts;
      if (spec.contains("profile")) opts.profile = profile_from_name(spec.at("profile").get<std::string>());
      if (spec.contains("noise_std")) opts.noise_std = spec.at("noise_std").get<double>();
      if (spec.contains("reference_w")) opts.reference_w = spec.at("reference_w").get<double>();
      if (spec.contains("penalty_threshold")) opts.penalty_threshold = spec.at("penalty_threshold").get<double>();
      const std::uint64_t seed = spec.contains("seed") ? spec.at("seed").get<std::uint64_t>() : 0;
      try {
        model = gen_landscape(regime_from_string(spec.at("regime").get<std::string>()), space, seed, opts);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
    out.reference = model.reference_params();
    out.env = std::make_unique<LandscapeEnvironment>(std::move(model));
  } else if (type == "remote") {
    check_keys(remote_keys);
    if (!spec.contains("host") || !spec.contains("port")) throw ConfigError("remote environment needs 'host' and 'port'");
    RemoteOptions opts;
    if (spec.contains("path")) opts.path = spec.at("path").get<std::string>();
    if (spec.contains("max_retries")) opts.max_retries = spec.at("max_retries").get<int>();
    const std::uint64_t t_max = spec.contains("t_max") ? spec.at("t_max").get<std::uint64_t>() : 1585;
    out.env = std::make_unique<RemoteEnvironment>(spec.at("host").get<std::string>(), spec.at("port").get<int>(),
                                                  space, t_max, opts);
  } else {
    throw ConfigError("unknown environment type '" + type + "' (expected replay|landscape|remote)");
  }
  return out;
}

RunConfig run_from_config(const json& config, const HyperParamSpace& space,
                          const std::optional<RewardParams>& reference, std::uint64_t env_t_max) {
  RunConfig run;
  try {
    run.method = method_from_string(config.value("method", std::string("hier_ucb")));
    run.batch_size = config.value("B", std::size_t{4});
    const std::uint64_t default_budget = space.dim_count() <= 2 ? 2000 : 6000;
    run.trials = config.value("T", std::max<std::uint64_t>(1, default_budget / std::max<std::size_t>(1, run.batch_size)));
    if (config.contains("reward")) {
      run.reward = reward_params_from_json(config.at("reward"));
    } else if (reference) {
      run.reward = *reference;
    } else {
      run.reward = RewardParams{0.5, env_t_max, 0.0};
    }
    run.alpha = config.value("alpha", 1.0);
    run.alpha_high = config.value("alpha_h", 1.0);
    run.alpha_low = config.value("alpha_l", 1.0);
    run.obs_variance = config.value("obs_variance", 1.0);
    if (config.contains("update_scope")) {
      const std::string s = config.at("update_scope").get<std::string>();
      if (s == "all_active")
        run.update_scope = UpdateScope::AllActive;
      else if (s == "pulled_only")
        run.update_scope = UpdateScope::PulledOnly;
      else
        throw ConfigError("config key 'update_scope': unknown value '" + s + "'");
    }
    run.seed = config.value("seed", std::uint64_t{0});
    run.recall_x = config.value("recall_x", space.dim_count() <= 2 ? std::size_t{3} : std::size_t{5});
    run.checkpoint_every = config.value("checkpoint_every", std::uint64_t{25});
    if (config.contains("initial_config"))
      run.initial_config = config_from_named_json(space, config.at("initial_config"));
    validate_run(run, space);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return run;
}

json resolved_run_json(const RunConfig& run, const json& config, const HyperParamSpace& space) {
  json out;
  out["method"] = method_to_string(run.method);
  out["T"] = run.trials;
  out["B"] = run.batch_size;
  out["reward"] = reward_params_to_json(run.reward);
  out["alpha"] = run.alpha;
  out["alpha_h"] = run.alpha_high;
  out["alpha_l"] = run.alpha_low;
  out["obs_variance"] = run.obs_variance;
  out["update_scope"] = run.update_scope == UpdateScope::AllActive ? "all_active" : "pulled_only";
  out["seed"] = run.seed;
  out["n_seeds"] = config.value("n_seeds", std::size_t{1});
  out["recall_x"] = run.recall_x;
  out["checkpoint_every"] = run.checkpoint_every;
  out["space"] = space_to_json(space);
  if (config.contains("environment")) out["environment"] = config.at("environment");
  if (config.contains("sweep")) out["sweep"] = config.at("sweep");
  if (config.contains("switch")) out["switch"] = config.at("switch");
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw EnvironmentError("cannot write " + path);
  f << content;
}

fs::path ensure_out_dir(const json& config, const std::string& cli_out) {
  const std::string out = !cli_out.empty() ? cli_out : config.value("out", std::string("out"));
  fs::create_directories(out);
  return out;
}

std::string seed_file_name(const std::string& prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_seed%03zu.csv", prefix.c_str(), index);
  return buf;
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_grid(const json& config, const std::string& cli_out) {
  const HyperParamSpace space = space_from_config(config);
  if (!config.contains("environment")) throw ConfigError("grid needs an 'environment'");
  BuiltEnvironment built = build_environment(config.at("environment"), space);
  if (!built.env->exhaustive())
    throw EnvironmentError("grid search needs exhaustive access; remote environments cannot provide it");

  RewardParams params = config.contains("reward") ? reward_params_from_json(config.at("reward"))
                        : built.reference          ? *built.reference
                                                   : RewardParams{0.5, built.env->descriptor().t_max, 0.0};
  const OracleTable oracle = grid_search(*built.env, params);

  const fs::path out = ensure_out_dir(config, cli_out);
  write_oracle_csv((out / "oracle.csv").string(), oracle);
  json resolved{{"space", space_to_json(space)}, {"reward", reward_params_to_json(params)},
                {"environment", config.at("environment")}, {"eval_count", oracle.eval_count}};
  write_text((out / "resolved-config.json").string(), resolved.dump(2) + "\n");
  std::cout << "oracle over " << oracle.mean_rewards.size() << " configs, eval_count=" << oracle.eval_count << "\n";
  return kExitOk;
}

int cmd_run(const json& config, const std::string& cli_out, std::size_t parallel) {
  const HyperParamSpace space = space_from_config(config);
  if (!config.contains("environment")) throw ConfigError("run needs an 'environment'");
  BuiltEnvironment built = build_environment(config.at("environment"), space);
  const RunConfig run = run_from_config(config, space, built.reference, built.env->descriptor().t_max);
  const std::size_t n_seeds = config.value("n_seeds", std::size_t{1});
  if (n_seeds == 0) throw ConfigError("n_seeds must be positive");

  if (!built.env->exhaustive())
    throw EnvironmentError("run needs an oracle; only replay and landscape environments support 'auto'");
  const OracleTable oracle = grid_search(*built.env, run.reward);

  const std::vector<Trajectory> trajectories = run_seeds(run, *built.env, oracle, n_seeds, parallel);
  const AggregateCurve agg = aggregate_seeds(trajectories);

  const fs::path out = ensure_out_dir(config, cli_out);
  write_oracle_csv((out / "oracle.csv").string(), oracle);
  write_results_csv((out / "results.csv").string(), trajectories);
  write_aggregate_csv((out / "aggregate.csv").string(), run.method, agg);
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    write_trial_log((out / seed_file_name("trials", i)).string(), trajectories[i]);
  write_text((out / "resolved-config.json").string(), resolved_run_json(run, config, space).dump(2) + "\n");

  std::cout << "ran " << method_to_string(run.method) << " x" << n_seeds << " seeds, T=" << run.trials
            << " B=" << run.batch_size << ", final recall@" << run.recall_x << " mean=" << fmt_double(agg.recall_mean.back())
            << "\n";
  return kExitOk;
}

int cmd_sweep(const json& config, const std::string& cli_out, std::size_t parallel) {
  const HyperParamSpace space = space_from_config(config);
  if (!config.contains("environment")) throw ConfigError("sweep needs an 'environment'");
  if (!config.contains("sweep") || !config.at("sweep").is_object() || config.at("sweep").empty())
    throw ConfigError("sweep needs a non-empty 'sweep' object of {parameter: [values...]}");
  BuiltEnvironment built = build_environment(config.at("environment"), space);
  const RunConfig base = run_from_config(config, space, built.reference, built.env->descriptor().t_max);
  const std::size_t n_seeds = config.value("n_seeds", std::size_t{1});

  SweepGrid grid;
  for (const auto& [key, values] : config.at("sweep").items()) {
    if (!values.is_array() || values.empty())
      throw ConfigError("sweep key '" + key + "' must map to a non-empty array");
    std::vector<OverrideValue> cell_values;
    for (const auto& v : values) {
      if (v.is_number())
        cell_values.emplace_back(v.get<double>());
      else if (v.is_string())
        cell_values.emplace_back(v.get<std::string>());
      else
        throw ConfigError("sweep key '" + key + "' has a value that is neither number nor string");
    }
    grid.emplace_back(key, std::move(cell_values));
  }
  // validate override keys before any evaluation begins
  for (const auto& [key, values] : grid) {
    try {
      apply_override(base, key, values.front());
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  if (!built.env->exhaustive()) throw EnvironmentError("sweep needs an exhaustive environment for its oracle");

  const fs::path out = ensure_out_dir(config, cli_out);
  std::vector<SweepCell> cells;
  try {
    cells = sweep(base, grid, *built.env, n_seeds, parallel);
  } catch (const std::exception& e) {
    throw EnvironmentError(e.what());
  }

  std::string summary = "cell,overrides,final_recall_mean,final_recall_std\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "cell_%03zu", i);
    const fs::path cell_dir = out / name;
    fs::create_directories(cell_dir);
    write_aggregate_csv((cell_dir / "aggregate.csv").string(), cells[i].run.method, cells[i].aggregate);
    json overrides = json::object();
    for (const auto& [key, value] : cells[i].overrides) {
      if (const double* d = std::get_if<double>(&value))
        overrides[key] = *d;
      else
        overrides[key] = std::get<std::string>(value);
    }
    write_text((cell_dir / "cell-config.json").string(),
               json{{"overrides", overrides}, {"run", resolved_run_json(cells[i].run, json::object(), space)}}.dump(2) +
                   "\n");
    std::string flat;
    for (const auto& [key, value] : cells[i].overrides) {
      if (!flat.empty()) flat += ';';
      flat += key + "=";
      flat += std::holds_alternative<double>(value) ? fmt_double(std::get<double>(value)) : std::get<std::string>(value);
    }
    summary += std::string(name) + "," + flat + "," + fmt_double(cells[i].aggregate.recall_mean.back()) + "," +
               fmt_double(cells[i].aggregate.recall_std.back()) + "\n";
  }
  write_text((out / "sweep_summary.csv").string(), summary);
  write_text((out / "resolved-config.json").string(), resolved_run_json(base, config, space).dump(2) + "\n");
  std::cout << "swept " << cells.size() << " cells x " << n_seeds << " seeds\n";
  return kExitOk;
}

int cmd_switch(const json& config, const std::string& cli_out, std::size_t parallel, const std::string& mode_flag) {
  const HyperParamSpace space = space_from_config(config);
  if (!config.contains("switch")) throw ConfigError("switch needs a 'switch' object");
  const json& sw = config.at("switch");
  for (const auto& [key, _] : sw.items())
    if (key != "phase1" && key != "phase2" && key != "switch_budget" && key != "mode")
      throw ConfigError("unknown switch key '" + key + "'");
  if (!sw.contains("phase1") || !sw.contains("phase2")) throw ConfigError("switch needs 'phase1' and 'phase2' environments");

  BuiltEnvironment env1 = build_environment(sw.at("phase1"), space);
  BuiltEnvironment env2 = build_environment(sw.at("phase2"), space);
  const RunConfig run = run_from_config(config, space, env1.reference, env1.env->descriptor().t_max);
  const std::uint64_t switch_budget = sw.value("switch_budget", run.trials / 2 * run.batch_size);
  const SwitchMode mode = switch_mode_from_string(!mode_flag.empty() ? mode_flag : sw.value("mode", std::string("continue")));
  const std::size_t n_seeds = config.value("n_seeds", std::size_t{1});

  if (!env1.env->exhaustive() || !env2.env->exhaustive())
    throw EnvironmentError("switch needs exhaustive environments for both phases");
  const OracleTable oracle1 = grid_search(*env1.env, run.reward);
  const OracleTable oracle2 = grid_search(*env2.env, run.reward);

  std::vector<Trajectory> phase1(n_seeds), phase2(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) {
    RunConfig r = run;
    r.seed = substream_seed(run.seed, i);
    SwitchOutput so = model_switch_run(r, *env1.env, *env2.env, switch_budget, mode, oracle1, oracle2);
    phase1[i] = std::move(so.phase1);
    phase2[i] = std::move(so.phase2);
  }
  (void)parallel;

  const fs::path out = ensure_out_dir(config, cli_out);
  write_results_csv((out / "phase1_results.csv").string(), phase1);
  write_results_csv((out / "phase2_results.csv").string(), phase2);
  write_aggregate_csv((out / "phase1_aggregate.csv").string(), run.method, aggregate_seeds(phase1));
  write_aggregate_csv((out / "phase2_aggregate.csv").string(), run.method, aggregate_seeds(phase2));
  for (std::size_t i = 0; i < n_seeds; ++i) {
    write_trial_log((out / seed_file_name("phase1_trials", i)).string(), phase1[i]);
    write_trial_log((out / seed_file_name("phase2_trials", i)).string(), phase2[i]);
  }
  json meta = resolved_run_json(run, config, space);
  meta["switch"] = {{"mode", switch_mode_to_string(mode)}, {"switch_budget", switch_budget}};
  write_text((out / "resolved-config.json").string(), meta.dump(2) + "\n");
  std::cout << "switch study (" << switch_mode_to_string(mode) << ") across " << n_seeds
            << " seeds, phase-2 final recall mean=" << fmt_double(aggregate_seeds(phase2).recall_mean.back()) << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& csv, const std::string& manifest) {
  const ValidationReport report = validate_replay_files(csv, manifest);
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
  if (report.ok()) {
    std::cout << "replay file is clean\n";
    return kExitOk;
  }
  std::cout << report.errors.size() << " error(s)\n";
  return kExitValidation;
}

int cmd_gen_landscape(const json& config, const std::string& cli_out, const std::string& regime_name,
                      std::uint64_t seed, double noise_std, double reference_w, const std::string& profile_name,
                      std::size_t export_replay, bool switch_pair) {
  const HyperParamSpace space = space_from_config(config);
  LandscapeOptions opts;
  opts.profile = profile_from_name(profile_name);
  opts.noise_std = noise_std;
  opts.reference_w = reference_w;

  const fs::path out = ensure_out_dir(config, cli_out);
  if (switch_pair) {
    const auto [p1, p2] = gen_switch_pair(space, seed, opts);
    save_landscape(p1, (out / "landscape_phase1.json").string());
    save_landscape(p2, (out / "landscape_phase2.json").string());
    std::cout << "wrote landscape_phase1.json and landscape_phase2.json\n";
    return kExitOk;
  }
  const LandscapeModel model = gen_landscape(regime_from_string(regime_name), space, seed, opts);
  const RegimeCheck check = verify_regime(model);
  if (!check.ok) throw EnvironmentError("generated landscape failed its regime check: " + check.detail);
  save_landscape(model, (out / "landscape.json").string());
  std::cout << "wrote landscape.json (" << check.detail << ")\n";
  if (export_replay > 0) {
    const ReplayTable table = sample_replay(model, export_replay, substream_seed(seed, 0xf1));
    save_replay(table, (out / "replay.csv").string());
    std::cout << "wrote replay.csv + manifest (" << table.space().cardinality() << " configs x " << export_replay
              << " queries)\n";
  }
  return kExitOk;
}

int cmd_serve(const std::string& host, int port) {
  TunerService service;
  httplib::Server server;
  register_routes(server, service);
  std::cout << "tuner sidecar listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw EnvironmentError("cannot bind " + host + ":" + std::to_string(port));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online RAG hyper-parameter tuning with flat and hierarchical bandits"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path, mode_flag;
  std::optional<std::uint64_t> seed_flag;
  std::size_t parallel = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed_flag, "master seed override");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--parallel", parallel, "parallel runs across seeds/cells");

  auto* grid = app.add_subcommand("grid", "exhaustive grid-search oracle");
  auto* run = app.add_subcommand("run", "online tuning run against a precomputed oracle");
  auto* sweep_cmd = app.add_subcommand("sweep", "ablation sweep over run-config overrides");
  auto* switch_cmd = app.add_subcommand("switch", "two-phase base-model switch study");
  switch_cmd->add_option("--mode", mode_flag, "continue|reset (overrides config)");

  std::string validate_csv;
  auto* validate = app.add_subcommand("validate", "check a replay file and manifest");
  validate->add_option("csv", validate_csv, "replay CSV path")->required();
  validate->add_option("--manifest", manifest_path, "manifest path (default: <csv>.manifest.json)");

  std::string regime_name = "easy", profile_name = "asqa-like";
  std::uint64_t gen_seed = 0;
  double noise_std = 0.0, reference_w = -1.0;
  std::size_t export_replay = 0;
  bool switch_pair = false;
  auto* gen = app.add_subcommand("gen-landscape", "generate a synthetic reward landscape");
  gen->add_option("--regime", regime_name, "easy|medium|hard");
  gen->add_option("--gen-seed", gen_seed, "landscape seed");
  gen->add_option("--noise-std", noise_std, "per-query accuracy noise (0 = regime default)");
  gen->add_option("--reference-w", reference_w, "reward weight the surface is shaped for");
  gen->add_option("--profile", profile_name, "asqa-like|nq-like");
  gen->add_option("--export-replay", export_replay, "also sample a replay table with N queries per config");
  gen->add_flag("--switch-pair", switch_pair, "write a correlated two-phase pair instead");

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "run the suggest/report tuning sidecar");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "bind port");

  CLI11_PARSE(app, argc, argv);

  try {
    json config = load_config_file(config_path);
    reject_unknown_keys(config);
    if (seed_flag) config["seed"] = *seed_flag;

    if (grid->parsed()) return cmd_grid(config, out_dir);
    if (run->parsed()) return cmd_run(config, out_dir, parallel);
    if (sweep_cmd->parsed()) return cmd_sweep(config, out_dir, parallel);
    if (switch_cmd->parsed()) return cmd_switch(config, out_dir, parallel, mode_flag);
    if (validate->parsed()) return cmd_validate(validate_csv, manifest_path);
    if (gen->parsed())
      return cmd_gen_landscape(config, out_dir, regime_name, gen_seed, noise_std, reference_w, profile_name,
                               export_replay, switch_pair);
    if (serve->parsed()) return cmd_serve(host, port);
    throw ConfigError("no subcommand selected");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RemoteTransportError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const EnvironmentError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}
