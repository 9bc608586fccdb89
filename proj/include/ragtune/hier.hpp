#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ragtune/bandit.hpp"
#include "ragtune/space.hpp"

namespace ragtune {

// Which low-level arms an observed reward is credited to. AllActive credits
// the active level of every dimension of the evaluated config (they jointly
// produced the reward); PulledOnly credits only the dimension that was
// actually re-tuned this trial.
enum class UpdateScope { AllActive, PulledOnly };

struct HierParams {
  double alpha_high = 1.0;
  double alpha_low = 1.0;
  UpdateScope scope = UpdateScope::AllActive;

  bool operator==(const HierParams&) const = default;
};

// Two-level bandit: a high-level UCB picks which dimension to re-tune, a
// per-dimension low-level UCB picks that dimension's value, and all other
// dimensions keep their previous values. Both levels share the global trial
// count as the UCB timestep.
class HierBandit {
 public:
  struct Selection {
    std::size_t dim = 0;
    std::size_t level = 0;
    Config proposed;
  };

  HierBandit(HyperParamSpace space, HierParams params, std::optional<Config> initial = std::nullopt)
      : space_(std::move(space)), params_(params), high_(space_.dim_count()) {
    if (params_.alpha_high < 0.0 || params_.alpha_low < 0.0)
      throw std::invalid_argument("HierBandit: alphas must be nonnegative");
    low_.reserve(space_.dim_count());
    for (const auto& d : space_.dims()) low_.emplace_back(d.levels.size());
    current_ = initial ? *initial : space_.midpoint_config();
    space_.require_config(current_);
  }

  // Rebuild from persisted parts (service snapshot/restore).
  HierBandit(HyperParamSpace space, HierParams params, std::vector<ArmStats> high,
             std::vector<std::vector<ArmStats>> low, Config current, std::map<std::size_t, ArmStats> config_stats,
             std::uint64_t total_trials)
      : space_(std::move(space)),
        params_(params),
        high_(std::move(high)),
        low_(std::move(low)),
        current_(std::move(current)),
        config_stats_(std::move(config_stats)),
        total_trials_(total_trials) {
    if (high_.size() != space_.dim_count()) throw std::invalid_argument("HierBandit: high-level arm count mismatch");
    if (low_.size() != space_.dim_count()) throw std::invalid_argument("HierBandit: low-level dimension mismatch");
    for (std::size_t d = 0; d < low_.size(); ++d)
      if (low_[d].size() != space_.dim(d).levels.size())
        throw std::invalid_argument("HierBandit: low-level arm count mismatch");
    space_.require_config(current_);
    std::uint64_t sum = 0;
    for (const auto& a : high_) sum += a.pulls;
    if (sum != total_trials_) throw std::invalid_argument("HierBandit: total_trials does not match high-level pulls");
    for (const auto& [idx, st] : config_stats_) {
      if (idx >= space_.cardinality()) throw std::invalid_argument("HierBandit: config_stats index out of range");
      if (st.pulls == 0) throw std::invalid_argument("HierBandit: config_stats entry with zero pulls");
    }
  }

  const HyperParamSpace& space() const { return space_; }
  const HierParams& params() const { return params_; }
  const std::vector<ArmStats>& high_stats() const { return high_; }
  const std::vector<std::vector<ArmStats>>& low_stats() const { return low_; }
  const Config& current_config() const { return current_; }
  const std::map<std::size_t, ArmStats>& config_stats() const { return config_stats_; }
  std::uint64_t total_trials() const { return total_trials_; }

  Selection select(RngStream& rng) const {
    const std::uint64_t t = std::max<std::uint64_t>(1, total_trials_);
    const std::size_t dim = detail::argmax_uniform_ties(
        high_.size(), rng, [&](std::size_t d) { return ucb_score(high_[d], t, params_.alpha_high); });
    const std::size_t level = detail::argmax_uniform_ties(
        low_[dim].size(), rng, [&](std::size_t l) { return ucb_score(low_[dim][l], t, params_.alpha_low); });
    Selection sel;
    sel.dim = dim;
    sel.level = level;
    sel.proposed = current_;
    sel.proposed.level_indices[dim] = level;
    return sel;
  }

  // Credits the reward to the pulled high-level arm, to low-level arms per
  // the update scope, and to the evaluated config's own statistics; the
  // evaluated config becomes the new current config.
  void update(std::size_t dim, std::size_t level, const Config& evaluated, double reward) {
    if (dim >= space_.dim_count()) throw std::invalid_argument("HierBandit::update: dimension out of range");
    if (level >= space_.dim(dim).levels.size()) throw std::invalid_argument("HierBandit::update: level out of range");
    space_.require_config(evaluated);
    if (evaluated.level_indices[dim] != level)
      throw std::invalid_argument("HierBandit::update: evaluated config does not carry the pulled level");

    high_[dim].add(reward);
    if (params_.scope == UpdateScope::AllActive) {
      for (std::size_t d = 0; d < space_.dim_count(); ++d) low_[d][evaluated.level_indices[d]].add(reward);
    } else {
      low_[dim][level].add(reward);
    }
    config_stats_[space_.flat_index(evaluated)].add(reward);
    current_ = evaluated;
    ++total_trials_;
  }

  void update(const Selection& sel, double reward) { update(sel.dim, sel.level, sel.proposed, reward); }

  // Visited configs by empirical mean (ties by config index), then unvisited
  // configs by composite score: the mean over dimensions of the constituent
  // low-level arm means, -infinity if any constituent arm is unpulled.
  Ranking rank_configs(std::size_t x = 1) const {
    const std::size_t card = space_.cardinality();
    if (x < 1) throw std::invalid_argument("rank_configs: x must be >= 1");
    if (x > card) throw std::invalid_argument("rank_configs: x exceeds the search-space cardinality");

    Ranking visited;
    visited.reserve(config_stats_.size());
    for (const auto& [idx, st] : config_stats_) visited.push_back({idx, st.mean_reward});
    std::stable_sort(visited.begin(), visited.end(), [](const RankEntry& a, const RankEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.config_index < b.config_index;
    });

    Ranking rest;
    rest.reserve(card - visited.size());
    for (std::size_t idx = 0; idx < card; ++idx) {
      if (config_stats_.count(idx)) continue;
      rest.push_back({idx, composite_score(space_.config_at(idx))});
    }
    std::stable_sort(rest.begin(), rest.end(), [](const RankEntry& a, const RankEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.config_index < b.config_index;
    });

    visited.insert(visited.end(), rest.begin(), rest.end());
    return visited;
  }

  double composite_score(const Config& c) const {
    space_.require_config(c);
    double sum = 0.0;
    for (std::size_t d = 0; d < space_.dim_count(); ++d) {
      const ArmStats& a = low_[d][c.level_indices[d]];
      if (a.pulls == 0) return -std::numeric_limits<double>::infinity();
      sum += a.mean_reward;
    }
    return sum / static_cast<double>(space_.dim_count());
  }

  void reset() {
    std::fill(high_.begin(), high_.end(), ArmStats{});
    for (auto& dim : low_) std::fill(dim.begin(), dim.end(), ArmStats{});
    config_stats_.clear();
    total_trials_ = 0;
  }

 private:
  HyperParamSpace space_;
  HierParams params_;
  std::vector<ArmStats> high_;
  std::vector<std::vector<ArmStats>> low_;
  Config current_;
  std::map<std::size_t, ArmStats> config_stats_;
  std::uint64_t total_trials_ = 0;
};

}  // namespace ragtune
