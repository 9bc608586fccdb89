#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ragtune {

// Weighted accuracy/token-cost trade-off. reward = w*acc - (1-w)*t/t_max,
// with accuracy at or below penalty_threshold replaced by -1.
struct RewardParams {
  double w = 0.5;
  std::uint64_t t_max = 1585;
  double penalty_threshold = 0.0;

  bool operator==(const RewardParams&) const = default;
};

inline void validate(const RewardParams& p) {
  if (!(p.w >= 0.0 && p.w <= 1.0)) throw std::invalid_argument("reward weight w must be in [0,1]");
  if (p.t_max < 1) throw std::invalid_argument("t_max must be at least 1");
  if (!(p.penalty_threshold >= 0.0 && p.penalty_threshold <= 1.0))
    throw std::invalid_argument("penalty_threshold must be in [0,1]");
}

// Evaluator score plus prompt size for one query.
struct QueryOutcome {
  double accuracy = 0.0;
  std::uint64_t tokens = 0;

  bool operator==(const QueryOutcome&) const = default;
};

inline double apply_penalty(double accuracy, const RewardParams& params) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw std::domain_error("accuracy must be in [0,1]");
  return accuracy <= params.penalty_threshold ? -1.0 : accuracy;
}

inline bool tokens_exceed_limit(const QueryOutcome& o, const RewardParams& params) { return o.tokens > params.t_max; }

// Scalar reward of one query. Tokens above t_max clamp to t_max; replay data
// may carry outliers and the loader reports them.
inline double compute_reward(const QueryOutcome& outcome, const RewardParams& params) {
  validate(params);
  const double acc = apply_penalty(outcome.accuracy, params);
  const std::uint64_t tokens = outcome.tokens > params.t_max ? params.t_max : outcome.tokens;
  return params.w * acc - (1.0 - params.w) * static_cast<double>(tokens) / static_cast<double>(params.t_max);
}

// One trial evaluates a batch of queries; the trial reward is their mean.
inline double batch_reward(std::span<const QueryOutcome> outcomes, const RewardParams& params) {
  if (outcomes.empty()) throw std::invalid_argument("batch_reward: empty batch");
  double sum = 0.0;
  for (const auto& o : outcomes) sum += compute_reward(o, params);
  return sum / static_cast<double>(outcomes.size());
}

inline double batch_reward(const std::vector<QueryOutcome>& outcomes, const RewardParams& params) {
  return batch_reward(std::span<const QueryOutcome>(outcomes), params);
}

}  // namespace ragtune
