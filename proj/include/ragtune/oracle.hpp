#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "ragtune/bandit.hpp"
#include "ragtune/environment.hpp"

namespace ragtune {

// Exhaustive ground truth: per-config mean reward over the full dataset and
// the exact descending ranking (ties by config index).
struct OracleTable {
  std::vector<double> mean_rewards;  // by flat config index
  Ranking ranking;
  std::uint64_t eval_count = 0;
};

inline OracleTable grid_search(const Environment& env, const RewardParams& params) {
  if (!env.exhaustive())
    throw std::invalid_argument("grid_search requires an environment with exhaustive access (replay or landscape)");
  OracleTable table;
  table.mean_rewards = env.exhaustive_mean_rewards(params);
  table.eval_count = env.exhaustive_eval_count();

  std::vector<std::size_t> idx(table.mean_rewards.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (table.mean_rewards[a] != table.mean_rewards[b]) return table.mean_rewards[a] > table.mean_rewards[b];
    return a < b;
  });
  table.ranking.reserve(idx.size());
  for (std::size_t i : idx) table.ranking.push_back({i, table.mean_rewards[i]});
  return table;
}

inline std::set<std::size_t> top_x_set(const Ranking& ranking, std::size_t x) {
  if (x < 1) throw std::invalid_argument("top_x_set: x must be >= 1");
  if (x > ranking.size()) throw std::invalid_argument("top_x_set: x exceeds the ranking length");
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < x; ++i) out.insert(ranking[i].config_index);
  return out;
}

// |top-x(method) intersect top-x(oracle)| / x.
inline double recall_at_x(const Ranking& method_ranking, const OracleTable& oracle, std::size_t x) {
  const auto mine = top_x_set(method_ranking, x);
  const auto truth = top_x_set(oracle.ranking, x);
  std::size_t hits = 0;
  for (std::size_t c : mine) hits += truth.count(c);
  return static_cast<double>(hits) / static_cast<double>(x);
}

}  // namespace ragtune
