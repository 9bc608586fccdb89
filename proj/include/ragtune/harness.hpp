#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ragtune/environment.hpp"
#include "ragtune/hier.hpp"
#include "ragtune/oracle.hpp"

namespace ragtune {

enum class Method { HierUcb, Ucb, Thompson, Random };

inline std::string method_to_string(Method m) {
  switch (m) {
    case Method::HierUcb: return "hier_ucb";
    case Method::Ucb: return "ucb";
    case Method::Thompson: return "thompson";
    case Method::Random: return "random";
  }
  throw std::logic_error("unreachable");
}

inline Method method_from_string(const std::string& s) {
  if (s == "hier_ucb") return Method::HierUcb;
  if (s == "ucb") return Method::Ucb;
  if (s == "thompson") return Method::Thompson;
  if (s == "random") return Method::Random;
  throw std::invalid_argument("unknown method '" + s + "' (expected hier_ucb|ucb|thompson|random)");
}

struct RunConfig {
  Method method = Method::HierUcb;
  std::uint64_t trials = 0;   // T
  std::size_t batch_size = 4; // B
  RewardParams reward;
  double alpha = 1.0;         // flat UCB
  double alpha_high = 1.0;
  double alpha_low = 1.0;
  double obs_variance = 1.0;  // Thompson
  UpdateScope update_scope = UpdateScope::AllActive;
  std::uint64_t seed = 0;
  std::size_t recall_x = 5;
  std::uint64_t checkpoint_every = 25;           // trials between recall checkpoints
  std::vector<std::uint64_t> eval_checkpoints;   // T*B budgets; empty -> derived
  std::optional<Config> initial_config;          // hierarchical start override
};

inline void validate_run(const RunConfig& run, const HyperParamSpace& space) {
  if (run.trials < 1) throw std::invalid_argument("run: T must be >= 1");
  if (run.batch_size < 1) throw std::invalid_argument("run: B must be >= 1");
  if (run.recall_x < 1 || run.recall_x > space.cardinality())
    throw std::invalid_argument("run: recall_x must be in [1, cardinality]");
  validate(run.reward);
  if (run.alpha < 0.0 || run.alpha_high < 0.0 || run.alpha_low < 0.0)
    throw std::invalid_argument("run: alphas must be nonnegative");
  if (run.obs_variance <= 0.0) throw std::invalid_argument("run: obs_variance must be positive");
  if (run.checkpoint_every < 1) throw std::invalid_argument("run: checkpoint_every must be >= 1");
  std::uint64_t prev = 0;
  for (std::uint64_t b : run.eval_checkpoints) {
    if (b <= prev && prev != 0) throw std::invalid_argument("run: eval_checkpoints must be strictly increasing");
    if (b % run.batch_size != 0) throw std::invalid_argument("run: checkpoint budgets must be multiples of B");
    if (b > run.trials * run.batch_size) throw std::invalid_argument("run: checkpoint budget exceeds T*B");
    prev = b;
  }
  if (run.initial_config) space.require_config(*run.initial_config);
}

// Budgets at which recall is recorded; every checkpoint_every trials plus
// the final trial unless explicit checkpoints were given.
inline std::vector<std::uint64_t> resolve_checkpoints(const RunConfig& run) {
  if (!run.eval_checkpoints.empty()) return run.eval_checkpoints;
  std::vector<std::uint64_t> budgets;
  for (std::uint64_t trial = run.checkpoint_every; trial < run.trials; trial += run.checkpoint_every)
    budgets.push_back(trial * run.batch_size);
  budgets.push_back(run.trials * run.batch_size);
  return budgets;
}

struct TrialRecord {
  std::uint64_t trial = 0;        // 1-based
  std::size_t config_index = 0;
  int pulled_dimension = -1;      // -1 for flat methods
  double reward = 0.0;
  std::vector<QueryOutcome> outcomes;
};

struct CheckpointRecord {
  std::uint64_t budget = 0;  // T*B consumed
  double recall = 0.0;
  double best_arm_mean = 0.0;  // empirical mean of the method's top-ranked config
};

struct Trajectory {
  Method method = Method::HierUcb;
  std::uint64_t seed = 0;
  std::vector<TrialRecord> trials;
  std::vector<CheckpointRecord> recall_curve;
  Ranking final_ranking;
};

using Learner = std::variant<FlatBandit, HierBandit>;

inline Learner make_learner(const RunConfig& run, const HyperParamSpace& space) {
  switch (run.method) {
    case Method::HierUcb:
      return HierBandit(space, HierParams{run.alpha_high, run.alpha_low, run.update_scope}, run.initial_config);
    case Method::Ucb: return FlatBandit(space.cardinality(), UcbPolicy{run.alpha});
    case Method::Thompson: return FlatBandit(space.cardinality(), ThompsonPolicy{run.obs_variance});
    case Method::Random: return FlatBandit(space.cardinality(), RandomPolicy{});
  }
  throw std::logic_error("unreachable");
}

inline Ranking learner_ranking(const Learner& learner) {
  if (const auto* flat = std::get_if<FlatBandit>(&learner)) return flat->rank();
  return std::get<HierBandit>(learner).rank_configs();
}

namespace detail {

// One select -> evaluate -> update trial; returns the filled record.
inline TrialRecord run_one_trial(Learner& learner, const HyperParamSpace& space, const Environment& env,
                                 const RunConfig& run, RngStream& rng, std::uint64_t trial) {
  TrialRecord rec;
  rec.trial = trial;
  try {
    if (auto* flat = std::get_if<FlatBandit>(&learner)) {
      const std::size_t idx = flat->select(rng);
      rec.config_index = idx;
      rec.outcomes = env.evaluate(space.config_at(idx), run.batch_size, rng);
      rec.reward = batch_reward(rec.outcomes, run.reward);
      flat->update(idx, rec.reward);
    } else {
      auto& hier = std::get<HierBandit>(learner);
      const HierBandit::Selection sel = hier.select(rng);
      rec.config_index = space.flat_index(sel.proposed);
      rec.pulled_dimension = static_cast<int>(sel.dim);
      rec.outcomes = env.evaluate(sel.proposed, run.batch_size, rng);
      rec.reward = batch_reward(rec.outcomes, run.reward);
      hier.update(sel, rec.reward);
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("trial " + std::to_string(trial) + ": " + e.what());
  }
  return rec;
}

inline CheckpointRecord make_checkpoint(const Learner& learner, const OracleTable& oracle, const RunConfig& run,
                                        std::uint64_t budget) {
  CheckpointRecord cp;
  cp.budget = budget;
  const Ranking ranking = learner_ranking(learner);
  cp.recall = recall_at_x(ranking, oracle, run.recall_x);
  cp.best_arm_mean = ranking.empty() || !std::isfinite(ranking.front().score) ? 0.0 : ranking.front().score;
  return cp;
}

}  // namespace detail

struct RunOutput {
  Trajectory trajectory;
  Learner learner;
};

// Executes T trials of batch size B against the environment, recording
// Recall@x against the precomputed oracle at each checkpoint budget. Fully
// deterministic given the seed.
inline RunOutput run_experiment(const RunConfig& run, const Environment& env, const OracleTable& oracle) {
  const HyperParamSpace& space = env.descriptor().space;
  validate_run(run, space);
  if (oracle.mean_rewards.size() != space.cardinality())
    throw std::invalid_argument("run_experiment: oracle does not cover the environment's space");

  const std::vector<std::uint64_t> checkpoints = resolve_checkpoints(run);
  RngStream rng(run.seed);
  RunOutput out{Trajectory{run.method, run.seed, {}, {}, {}}, make_learner(run, space)};
  out.trajectory.trials.reserve(run.trials);

  std::size_t next_cp = 0;
  for (std::uint64_t trial = 1; trial <= run.trials; ++trial) {
    out.trajectory.trials.push_back(detail::run_one_trial(out.learner, space, env, run, rng, trial));
    const std::uint64_t budget = trial * run.batch_size;
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= budget) {
      out.trajectory.recall_curve.push_back(detail::make_checkpoint(out.learner, oracle, run, checkpoints[next_cp]));
      ++next_cp;
    }
  }
  out.trajectory.final_ranking = learner_ranking(out.learner);
  return out;
}

// Runs n_seeds independent repetitions; repetition i uses the i-th
// substream of run.seed. Optional parallelism across repetitions.
inline std::vector<Trajectory> run_seeds(const RunConfig& run, const Environment& env, const OracleTable& oracle,
                                         std::size_t n_seeds, std::size_t n_jobs = 1) {
  if (n_seeds == 0) throw std::invalid_argument("run_seeds: n_seeds must be positive");
  std::vector<Trajectory> out(n_seeds);
  auto work = [&](std::size_t i) {
    RunConfig r = run;
    r.seed = substream_seed(run.seed, i);
    out[i] = run_experiment(r, env, oracle).trajectory;
  };
  if (n_jobs <= 1) {
    for (std::size_t i = 0; i < n_seeds; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t j = 0; j < std::min(n_jobs, n_seeds); ++j)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n_seeds; i = next.fetch_add(1)) work(i);
      });
    for (auto& t : pool) t.join();
  }
  return out;
}

enum class SwitchMode { Continue, Reset };

inline std::string switch_mode_to_string(SwitchMode m) { return m == SwitchMode::Continue ? "continue" : "reset"; }

inline SwitchMode switch_mode_from_string(const std::string& s) {
  if (s == "continue") return SwitchMode::Continue;
  if (s == "reset") return SwitchMode::Reset;
  throw std::invalid_argument("unknown switch mode '" + s + "' (expected continue|reset)");
}

struct SwitchOutput {
  Trajectory phase1;
  Trajectory phase2;  // budgets counted within phase 2; includes a budget-0 checkpoint
};

// Two-phase run emulating a base-model upgrade: phase 1 on env1 up to
// switch_budget, then phase 2 on env2. Continue carries all learner state
// across the switch; Reset zeroes it (cold start). Phase-2 recall is
// computed against phase 2's own oracle.
inline SwitchOutput model_switch_run(const RunConfig& run, const Environment& env1, const Environment& env2,
                                     std::uint64_t switch_budget, SwitchMode mode, const OracleTable& oracle1,
                                     const OracleTable& oracle2) {
  const HyperParamSpace& space = env1.descriptor().space;
  if (!(env2.descriptor().space == space))
    throw std::invalid_argument("model_switch_run: phase environments use different spaces");
  validate_run(run, space);
  if (switch_budget % run.batch_size != 0)
    throw std::invalid_argument("model_switch_run: switch_budget must be a multiple of B");
  const std::uint64_t t1 = switch_budget / run.batch_size;
  if (t1 < 1 || t1 >= run.trials)
    throw std::invalid_argument("model_switch_run: switch_budget must fall strictly inside the total budget");
  const std::uint64_t t2 = run.trials - t1;

  RngStream rng(run.seed);
  Learner learner = make_learner(run, space);

  SwitchOutput out;
  out.phase1 = {run.method, run.seed, {}, {}, {}};
  out.phase2 = out.phase1;

  RunConfig phase1_cfg = run;
  phase1_cfg.trials = t1;
  std::vector<std::uint64_t> cps1 = resolve_checkpoints(phase1_cfg);
  std::size_t next_cp = 0;
  for (std::uint64_t trial = 1; trial <= t1; ++trial) {
    out.phase1.trials.push_back(detail::run_one_trial(learner, space, env1, run, rng, trial));
    while (next_cp < cps1.size() && cps1[next_cp] <= trial * run.batch_size) {
      out.phase1.recall_curve.push_back(detail::make_checkpoint(learner, oracle1, run, cps1[next_cp]));
      ++next_cp;
    }
  }
  out.phase1.final_ranking = learner_ranking(learner);

  if (mode == SwitchMode::Reset) {
    if (auto* flat = std::get_if<FlatBandit>(&learner))
      flat->reset();
    else
      std::get<HierBandit>(learner).reset();
  }

  // budget-0 checkpoint exposes the state carried across the switch
  out.phase2.recall_curve.push_back(detail::make_checkpoint(learner, oracle2, run, 0));
  RunConfig phase2_cfg = run;
  phase2_cfg.trials = t2;
  std::vector<std::uint64_t> cps2 = resolve_checkpoints(phase2_cfg);
  next_cp = 0;
  for (std::uint64_t trial = 1; trial <= t2; ++trial) {
    out.phase2.trials.push_back(detail::run_one_trial(learner, space, env2, run, rng, trial));
    while (next_cp < cps2.size() && cps2[next_cp] <= trial * run.batch_size) {
      out.phase2.recall_curve.push_back(detail::make_checkpoint(learner, oracle2, run, cps2[next_cp]));
      ++next_cp;
    }
  }
  out.phase2.final_ranking = learner_ranking(learner);
  return out;
}

struct AggregateCurve {
  std::vector<std::uint64_t> budgets;
  std::vector<double> recall_mean;
  std::vector<double> recall_std;  // sample standard deviation; 0 for a single run
};

inline AggregateCurve aggregate_seeds(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("aggregate_seeds: no trajectories");
  const auto& first = trajectories.front().recall_curve;
  AggregateCurve agg;
  agg.budgets.reserve(first.size());
  for (const auto& cp : first) agg.budgets.push_back(cp.budget);
  for (const auto& t : trajectories) {
    if (t.recall_curve.size() != first.size())
      throw std::invalid_argument("aggregate_seeds: trajectories have misaligned checkpoints");
    for (std::size_t i = 0; i < first.size(); ++i)
      if (t.recall_curve[i].budget != agg.budgets[i])
        throw std::invalid_argument("aggregate_seeds: trajectories have misaligned checkpoints");
  }
  const double n = static_cast<double>(trajectories.size());
  for (std::size_t i = 0; i < agg.budgets.size(); ++i) {
    double mean = 0.0;
    for (const auto& t : trajectories) mean += t.recall_curve[i].recall;
    mean /= n;
    double ssd = 0.0;
    for (const auto& t : trajectories) {
      const double d = t.recall_curve[i].recall - mean;
      ssd += d * d;
    }
    agg.recall_mean.push_back(mean);
    agg.recall_std.push_back(trajectories.size() > 1 ? std::sqrt(ssd / (n - 1.0)) : 0.0);
  }
  return agg;
}

// ---- ablation sweeps -------------------------------------------------------

using OverrideValue = std::variant<double, std::string>;
using SweepGrid = std::vector<std::pair<std::string, std::vector<OverrideValue>>>;

inline RunConfig apply_override(RunConfig run, const std::string& key, const OverrideValue& value) {
  const auto num = [&]() -> double {
    if (const double* d = std::get_if<double>(&value)) return *d;
    throw std::invalid_argument("override '" + key + "' expects a numeric value");
  };
  const auto str = [&]() -> std::string {
    if (const std::string* s = std::get_if<std::string>(&value)) return *s;
    throw std::invalid_argument("override '" + key + "' expects a string value");
  };
  if (key == "T")
    run.trials = static_cast<std::uint64_t>(num());
  else if (key == "B")
    run.batch_size = static_cast<std::size_t>(num());
  else if (key == "alpha")
    run.alpha = num();
  else if (key == "alpha_h")
    run.alpha_high = num();
  else if (key == "alpha_l")
    run.alpha_low = num();
  else if (key == "obs_variance")
    run.obs_variance = num();
  else if (key == "recall_x")
    run.recall_x = static_cast<std::size_t>(num());
  else if (key == "w")
    run.reward.w = num();
  else if (key == "t_max")
    run.reward.t_max = static_cast<std::uint64_t>(num());
  else if (key == "penalty_threshold")
    run.reward.penalty_threshold = num();
  else if (key == "checkpoint_every")
    run.checkpoint_every = static_cast<std::uint64_t>(num());
  else if (key == "seed")
    run.seed = static_cast<std::uint64_t>(num());
  else if (key == "method")
    run.method = method_from_string(str());
  else if (key == "update_scope") {
    const std::string s = str();
    if (s == "all_active")
      run.update_scope = UpdateScope::AllActive;
    else if (s == "pulled_only")
      run.update_scope = UpdateScope::PulledOnly;
    else
      throw std::invalid_argument("override 'update_scope': unknown value '" + s + "'");
  } else {
    throw std::invalid_argument("unknown run-config override '" + key + "'");
  }
  return run;
}

struct SweepCell {
  std::vector<std::pair<std::string, OverrideValue>> overrides;
  RunConfig run;
  AggregateCurve aggregate;
};

// Cartesian product of the grid's overrides; every cell runs the same
// derived seed list, so cells differ only in the swept parameters. Each
// cell is scored against the oracle for its own reward params (sweeping w
// or t_max changes the ground-truth ranking).
inline std::vector<SweepCell> sweep(const RunConfig& base, const SweepGrid& grid, const Environment& env,
                                    std::size_t n_seeds, std::size_t n_jobs = 1) {
  std::vector<SweepCell> cells;
  cells.push_back({{}, base, {}});
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw std::invalid_argument("sweep: override '" + key + "' has no values");
    std::vector<SweepCell> expanded;
    expanded.reserve(cells.size() * values.size());
    for (const auto& cell : cells)
      for (const auto& v : values) {
        SweepCell next = cell;
        next.run = apply_override(next.run, key, v);
        next.overrides.emplace_back(key, v);
        expanded.push_back(std::move(next));
      }
    cells = std::move(expanded);
  }
  std::map<std::pair<double, std::uint64_t>, OracleTable> oracle_cache;
  for (auto& cell : cells) {
    const auto key = std::make_pair(cell.run.reward.w, cell.run.reward.t_max);
    auto it = oracle_cache.find(key);
    if (it == oracle_cache.end()) it = oracle_cache.emplace(key, grid_search(env, cell.run.reward)).first;
    cell.aggregate = aggregate_seeds(run_seeds(cell.run, env, it->second, n_seeds, n_jobs));
  }
  return cells;
}

}  // namespace ragtune
