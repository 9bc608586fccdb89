#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ragtune/rng.hpp"

namespace ragtune {

// Running per-arm statistics: pull count, empirical mean and the running sum
// of squared deviations (Welford) for variance diagnostics.
struct ArmStats {
  std::uint64_t pulls = 0;
  double mean_reward = 0.0;
  double sum_sq_dev = 0.0;

  void add(double reward) {
    ++pulls;
    const double delta = reward - mean_reward;
    mean_reward += delta / static_cast<double>(pulls);
    sum_sq_dev += delta * (reward - mean_reward);
  }

  double variance() const { return pulls > 1 ? sum_sq_dev / static_cast<double>(pulls - 1) : 0.0; }

  bool operator==(const ArmStats&) const = default;
};

// mean + alpha*sqrt(ln(t)/pulls); +infinity while the arm is unpulled so
// every arm gets tried once before any repeat.
inline double ucb_score(const ArmStats& stats, std::uint64_t t, double alpha) {
  if (t == 0) throw std::invalid_argument("ucb_score: t must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("ucb_score: alpha must be nonnegative");
  if (stats.pulls == 0) return std::numeric_limits<double>::infinity();
  return stats.mean_reward +
         alpha * std::sqrt(std::log(static_cast<double>(t)) / static_cast<double>(stats.pulls));
}

struct UcbPolicy {
  double alpha = 1.0;
  bool operator==(const UcbPolicy&) const = default;
};
struct ThompsonPolicy {
  double obs_variance = 1.0;
  bool operator==(const ThompsonPolicy&) const = default;
};
struct RandomPolicy {
  bool operator==(const RandomPolicy&) const = default;
};
using Policy = std::variant<UcbPolicy, ThompsonPolicy, RandomPolicy>;

struct RankEntry {
  std::size_t config_index = 0;
  double score = 0.0;

  bool operator==(const RankEntry&) const = default;
};
// Permutation of all config indices, best first.
using Ranking = std::vector<RankEntry>;

namespace detail {

// Argmax with uniform tie-breaking from the provided stream.
template <typename ScoreFn>
std::size_t argmax_uniform_ties(std::size_t n, RngStream& rng, ScoreFn&& score) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = score(i);
    if (s > best) {
      best = s;
      ties.assign(1, i);
    } else if (s == best) {
      ties.push_back(i);
    }
  }
  return ties.size() == 1 ? ties.front() : ties[rng.uniform_index(ties.size())];
}

}  // namespace detail

// Flat bandit over the flattened configuration set. One logical owner at a
// time; no interior locking.
class FlatBandit {
 public:
  FlatBandit(std::size_t arm_count, Policy policy) : policy_(policy), arms_(arm_count) {
    if (arm_count == 0) throw std::invalid_argument("FlatBandit: arm set must not be empty");
  }

  // Rebuild from persisted parts (service snapshot/restore).
  FlatBandit(std::vector<ArmStats> arms, std::uint64_t total_trials, Policy policy)
      : policy_(policy), arms_(std::move(arms)), total_trials_(total_trials) {
    if (arms_.empty()) throw std::invalid_argument("FlatBandit: arm set must not be empty");
    std::uint64_t sum = 0;
    for (const auto& a : arms_) sum += a.pulls;
    if (sum != total_trials_) throw std::invalid_argument("FlatBandit: total_trials does not match pull counts");
  }

  std::size_t arm_count() const { return arms_.size(); }
  const ArmStats& arm(std::size_t i) const { return arms_.at(i); }
  const std::vector<ArmStats>& arms() const { return arms_; }
  std::uint64_t total_trials() const { return total_trials_; }
  const Policy& policy() const { return policy_; }

  std::size_t select(RngStream& rng) const {
    struct V {
      const FlatBandit* self;
      RngStream* rng;
      std::size_t operator()(const UcbPolicy& p) const { return self->select_ucb(*rng, p.alpha); }
      std::size_t operator()(const ThompsonPolicy& p) const { return self->select_thompson(*rng, p.obs_variance); }
      std::size_t operator()(const RandomPolicy&) const { return self->select_random(*rng); }
    };
    return std::visit(V{this, &rng}, policy_);
  }

  std::size_t select_ucb(RngStream& rng, double alpha) const {
    const std::uint64_t t = std::max<std::uint64_t>(1, total_trials_);
    return detail::argmax_uniform_ties(arms_.size(), rng,
                                       [&](std::size_t i) { return ucb_score(arms_[i], t, alpha); });
  }

  // Gaussian posterior per arm: prior N(0,1), known observation variance v.
  // posterior mean n*m/(n+v), posterior variance v/(n+v).
  std::size_t select_thompson(RngStream& rng, double obs_variance) const {
    if (obs_variance <= 0.0) throw std::invalid_argument("select_thompson: obs_variance must be positive");
    std::vector<double> samples(arms_.size());
    for (std::size_t i = 0; i < arms_.size(); ++i) {
      const double n = static_cast<double>(arms_[i].pulls);
      const double post_mean = n * arms_[i].mean_reward / (n + obs_variance);
      const double post_var = obs_variance / (n + obs_variance);
      samples[i] = rng.gaussian(post_mean, std::sqrt(post_var));
    }
    return detail::argmax_uniform_ties(arms_.size(), rng, [&](std::size_t i) { return samples[i]; });
  }

  std::size_t select_random(RngStream& rng) const { return rng.uniform_index(arms_.size()); }

  void update(std::size_t config_index, double reward) {
    if (config_index >= arms_.size()) throw std::out_of_range("FlatBandit::update: invalid config index");
    arms_[config_index].add(reward);
    ++total_trials_;
  }

  // Empirical-mean ranking: pulled arms by mean descending, unpulled arms
  // after all pulled ones, ties by ascending config index. Unpulled arms
  // score -infinity.
  Ranking rank() const {
    std::vector<std::size_t> idx(arms_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const bool pa = arms_[a].pulls > 0, pb = arms_[b].pulls > 0;
      if (pa != pb) return pa;
      if (pa && arms_[a].mean_reward != arms_[b].mean_reward) return arms_[a].mean_reward > arms_[b].mean_reward;
      return a < b;
    });
    Ranking out;
    out.reserve(idx.size());
    for (std::size_t i : idx)
      out.push_back({i, arms_[i].pulls > 0 ? arms_[i].mean_reward : -std::numeric_limits<double>::infinity()});
    return out;
  }

  void reset() {
    std::fill(arms_.begin(), arms_.end(), ArmStats{});
    total_trials_ = 0;
  }

 private:
  Policy policy_;
  std::vector<ArmStats> arms_;
  std::uint64_t total_trials_ = 0;
};

}  // namespace ragtune
