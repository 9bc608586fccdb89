#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragtune/bandit.hpp"
#include "ragtune/hier.hpp"
#include "ragtune/reward.hpp"
#include "ragtune/space.hpp"

namespace ragtune {

inline nlohmann::json level_to_json(const Level& level) {
  struct V {
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(double v) const { return v; }
    nlohmann::json operator()(const std::string& v) const { return v; }
  };
  return std::visit(V{}, level);
}

inline Level level_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Level{j.get<std::int64_t>()};
  if (j.is_number_float()) return Level{j.get<double>()};
  if (j.is_string()) return Level{j.get<std::string>()};
  throw std::invalid_argument("level must be an integer, a real or a string");
}

inline nlohmann::json space_to_json(const HyperParamSpace& space) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : space.dims()) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : d.levels) levels.push_back(level_to_json(l));
    dims.push_back({{"name", d.name}, {"levels", std::move(levels)}});
  }
  return {{"dimensions", std::move(dims)}};
}

inline HyperParamSpace space_from_json(const nlohmann::json& j) {
  if (!j.contains("dimensions") || !j["dimensions"].is_array())
    throw std::invalid_argument("space: 'dimensions' array required");
  std::vector<Dimension> dims;
  for (const auto& dj : j["dimensions"]) {
    Dimension d;
    d.name = dj.at("name").get<std::string>();
    for (const auto& lj : dj.at("levels")) d.levels.push_back(level_from_json(lj));
    dims.push_back(std::move(d));
  }
  return HyperParamSpace(std::move(dims));
}

inline nlohmann::json config_to_named_json(const HyperParamSpace& space, const Config& config) {
  space.require_config(config);
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t d = 0; d < space.dim_count(); ++d)
    out[space.dim(d).name] = level_to_json(space.level_of(config, d));
  return out;
}

inline Config config_from_named_json(const HyperParamSpace& space, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object of {dimension: level}");
  Config c;
  c.level_indices.resize(space.dim_count());
  std::size_t matched = 0;
  for (std::size_t d = 0; d < space.dim_count(); ++d) {
    const auto& dim = space.dim(d);
    if (!j.contains(dim.name)) throw std::invalid_argument("config lacks dimension '" + dim.name + "'");
    const Level want = level_from_json(j[dim.name]);
    bool found = false;
    for (std::size_t l = 0; l < dim.levels.size(); ++l)
      if (dim.levels[l] == want) {
        c.level_indices[d] = l;
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument("config level '" + level_to_string(want) + "' is not in dimension '" + dim.name + "'");
    ++matched;
  }
  if (j.size() != matched) throw std::invalid_argument("config names unknown dimensions");
  return c;
}

inline nlohmann::json arm_stats_to_json(const ArmStats& s) {
  return {{"pulls", s.pulls}, {"mean_reward", s.mean_reward}, {"sum_sq_dev", s.sum_sq_dev}};
}

inline ArmStats arm_stats_from_json(const nlohmann::json& j) {
  ArmStats s;
  s.pulls = j.at("pulls").get<std::uint64_t>();
  s.mean_reward = j.at("mean_reward").get<double>();
  s.sum_sq_dev = j.at("sum_sq_dev").get<double>();
  return s;
}

inline nlohmann::json reward_params_to_json(const RewardParams& p) {
  return {{"w", p.w}, {"t_max", p.t_max}, {"penalty_threshold", p.penalty_threshold}};
}

inline RewardParams reward_params_from_json(const nlohmann::json& j) {
  RewardParams p;
  if (j.contains("w")) p.w = j.at("w").get<double>();
  if (j.contains("t_max")) p.t_max = j.at("t_max").get<std::uint64_t>();
  if (j.contains("penalty_threshold")) p.penalty_threshold = j.at("penalty_threshold").get<double>();
  validate(p);
  return p;
}

inline nlohmann::json policy_to_json(const Policy& policy) {
  struct V {
    nlohmann::json operator()(const UcbPolicy& p) const { return {{"type", "ucb"}, {"alpha", p.alpha}}; }
    nlohmann::json operator()(const ThompsonPolicy& p) const {
      return {{"type", "thompson"}, {"obs_variance", p.obs_variance}};
    }
    nlohmann::json operator()(const RandomPolicy&) const { return {{"type", "random"}}; }
  };
  return std::visit(V{}, policy);
}

inline Policy policy_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "ucb") return UcbPolicy{j.at("alpha").get<double>()};
  if (type == "thompson") return ThompsonPolicy{j.at("obs_variance").get<double>()};
  if (type == "random") return RandomPolicy{};
  throw std::invalid_argument("unknown policy type '" + type + "'");
}

inline nlohmann::json flat_bandit_to_json(const FlatBandit& b) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& a : b.arms()) arms.push_back(arm_stats_to_json(a));
  return {{"policy", policy_to_json(b.policy())}, {"arms", std::move(arms)}, {"total_trials", b.total_trials()}};
}

inline FlatBandit flat_bandit_from_json(const nlohmann::json& j) {
  std::vector<ArmStats> arms;
  for (const auto& aj : j.at("arms")) arms.push_back(arm_stats_from_json(aj));
  return FlatBandit(std::move(arms), j.at("total_trials").get<std::uint64_t>(), policy_from_json(j.at("policy")));
}

inline nlohmann::json hier_bandit_to_json(const HierBandit& b) {
  nlohmann::json high = nlohmann::json::array();
  for (const auto& a : b.high_stats()) high.push_back(arm_stats_to_json(a));
  nlohmann::json low = nlohmann::json::array();
  for (const auto& dim : b.low_stats()) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& a : dim) arms.push_back(arm_stats_to_json(a));
    low.push_back(std::move(arms));
  }
  nlohmann::json cfg_stats = nlohmann::json::object();
  for (const auto& [idx, st] : b.config_stats()) cfg_stats[std::to_string(idx)] = arm_stats_to_json(st);
  return {{"space", space_to_json(b.space())},
          {"alpha_high", b.params().alpha_high},
          {"alpha_low", b.params().alpha_low},
          {"update_scope", b.params().scope == UpdateScope::AllActive ? "all_active" : "pulled_only"},
          {"high", std::move(high)},
          {"low", std::move(low)},
          {"current_config", b.current_config().level_indices},
          {"config_stats", std::move(cfg_stats)},
          {"total_trials", b.total_trials()}};
}

inline HierBandit hier_bandit_from_json(const nlohmann::json& j) {
  HyperParamSpace space = space_from_json(j.at("space"));
  HierParams params;
  params.alpha_high = j.at("alpha_high").get<double>();
  params.alpha_low = j.at("alpha_low").get<double>();
  const std::string scope = j.at("update_scope").get<std::string>();
  if (scope == "all_active")
    params.scope = UpdateScope::AllActive;
  else if (scope == "pulled_only")
    params.scope = UpdateScope::PulledOnly;
  else
    throw std::invalid_argument("unknown update_scope '" + scope + "'");

  std::vector<ArmStats> high;
  for (const auto& aj : j.at("high")) high.push_back(arm_stats_from_json(aj));
  std::vector<std::vector<ArmStats>> low;
  for (const auto& dj : j.at("low")) {
    std::vector<ArmStats> arms;
    for (const auto& aj : dj) arms.push_back(arm_stats_from_json(aj));
    low.push_back(std::move(arms));
  }
  Config current;
  current.level_indices = j.at("current_config").get<std::vector<std::size_t>>();
  std::map<std::size_t, ArmStats> cfg_stats;
  for (const auto& [key, sj] : j.at("config_stats").items())
    cfg_stats[static_cast<std::size_t>(std::stoull(key))] = arm_stats_from_json(sj);
  return HierBandit(std::move(space), params, std::move(high), std::move(low), std::move(current),
                    std::move(cfg_stats), j.at("total_trials").get<std::uint64_t>());
}

}  // namespace ragtune
