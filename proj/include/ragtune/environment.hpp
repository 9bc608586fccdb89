#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ragtune/reward.hpp"
#include "ragtune/rng.hpp"
#include "ragtune/space.hpp"

namespace ragtune {

// Dataset stand-in; fixes the token normalization constant.
struct DatasetProfile {
  std::string name = "asqa-like";
  std::uint64_t t_max = 1585;

  bool operator==(const DatasetProfile&) const = default;
};

inline DatasetProfile asqa_like_profile() { return {"asqa-like", 1585}; }
inline DatasetProfile nq_like_profile() { return {"nq-like", 2205}; }

struct EnvDescriptor {
  std::string name;
  HyperParamSpace space;
  std::uint64_t t_max = 1585;
};

// Evaluation backend standing in for the live RAG pipeline. Implementations
// are immutable after construction and safe for concurrent readers; each
// caller brings its own randomness stream.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvDescriptor& descriptor() const = 0;

  // Returns exactly batch_size outcomes for one trial of the given config.
  virtual std::vector<QueryOutcome> evaluate(const Config& config, std::size_t batch_size, RngStream& rng) const = 0;

  // Exhaustive ground-truth access. Replay tables expose the full-table
  // per-config means; landscapes expose noise-free analytic means.
  virtual bool exhaustive() const { return false; }
  virtual std::vector<double> exhaustive_mean_rewards(const RewardParams&) const {
    throw std::logic_error("environment does not support exhaustive access");
  }
  // Query evaluations an exhaustive pass consumes (0 for analytic oracles).
  virtual std::uint64_t exhaustive_eval_count() const { return 0; }
};

}  // namespace ragtune
