#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragtune/environment.hpp"
#include "ragtune/replay.hpp"
#include "ragtune/serialize.hpp"

namespace ragtune {

// Complexity regimes observed in exhaustive evaluations: Easy has one
// sharply separated optimum, Medium a small near-tied top cluster, Hard a
// broad degenerate plateau of near-identical rewards.
enum class Regime { Easy, Medium, Hard };

inline std::string regime_to_string(Regime r) {
  switch (r) {
    case Regime::Easy: return "easy";
    case Regime::Medium: return "medium";
    case Regime::Hard: return "hard";
  }
  throw std::logic_error("unreachable");
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "easy") return Regime::Easy;
  if (s == "medium") return Regime::Medium;
  if (s == "hard") return Regime::Hard;
  throw std::invalid_argument("unknown regime '" + s + "' (expected easy|medium|hard)");
}

// Parametric stand-in for a full grid evaluation: per-config mean accuracy
// and prompt size, plus the per-query accuracy noise level. Immutable.
struct LandscapeModel {
  HyperParamSpace space;
  std::vector<double> mean_accuracy;        // per flat config index
  std::vector<std::uint64_t> mean_tokens;   // per flat config index
  double noise_std = 0.0;
  Regime regime = Regime::Easy;
  DatasetProfile profile;
  double reference_w = 0.5;  // reward weight the surface was shaped for
  double penalty_threshold = 0.0;
  std::uint64_t seed = 0;

  RewardParams reference_params() const { return {reference_w, profile.t_max, penalty_threshold}; }
};

// Noise-free mean reward of one config; the analytic ground truth used as
// the grid-search oracle for landscape environments.
inline double analytic_mean_reward(const LandscapeModel& model, std::size_t config_index, const RewardParams& params) {
  const double acc = apply_penalty(model.mean_accuracy.at(config_index), params);
  const std::uint64_t tokens = std::min<std::uint64_t>(model.mean_tokens.at(config_index), params.t_max);
  return params.w * acc - (1.0 - params.w) * static_cast<double>(tokens) / static_cast<double>(params.t_max);
}

struct LandscapeOptions {
  DatasetProfile profile = asqa_like_profile();
  double noise_std = 0.0;    // 0 -> regime default
  double reference_w = -1.0; // <0 -> regime default
  double penalty_threshold = 0.0;
};

namespace detail {

inline double regime_default_noise(Regime r) {
  switch (r) {
    case Regime::Easy: return 0.02;
    case Regime::Medium: return 0.10;
    case Regime::Hard: return 0.10;
  }
  throw std::logic_error("unreachable");
}

inline double regime_default_w(Regime r) { return r == Regime::Medium ? 0.9 : 0.5; }

// Token fraction surface: base cost plus a positive slope along every
// numeric dimension (more chunks, less compression -> more tokens); label
// dimensions do not move the prompt size.
inline std::vector<double> token_fractions(const HyperParamSpace& space) {
  std::size_t numeric_dims = 0;
  for (const auto& d : space.dims())
    if (std::all_of(d.levels.begin(), d.levels.end(), level_is_numeric)) ++numeric_dims;
  const double slope = numeric_dims ? 0.12 / static_cast<double>(numeric_dims) : 0.0;

  std::vector<double> tau(space.cardinality());
  for (std::size_t idx = 0; idx < tau.size(); ++idx) {
    const Config c = space.config_at(idx);
    double t = 0.25;
    for (std::size_t d = 0; d < space.dim_count(); ++d) {
      const auto& dim = space.dim(d);
      if (!std::all_of(dim.levels.begin(), dim.levels.end(), level_is_numeric)) continue;
      t += slope * static_cast<double>(c.level_indices[d]) / static_cast<double>(dim.levels.size() - 1);
    }
    tau[idx] = t;
  }
  return tau;
}

// Per-dimension penalty ladder indexed by distance rank from the peak level
// (rank 0 = peak, penalty 0). Strictly increasing, so the additive surfaces
// are unimodal on the lattice.
inline std::vector<double> distance_ranks_to_levels(std::size_t n_levels, std::size_t peak,
                                                    const std::vector<double>& ladder) {
  // order levels by (distance to peak, index); ladder[k] is the penalty of
  // the k-th closest level
  std::vector<std::size_t> order(n_levels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const std::size_t da = a > peak ? a - peak : peak - a;
    const std::size_t db = b > peak ? b - peak : peak - b;
    if (da != db) return da < db;
    return a < b;
  });
  std::vector<double> pen(n_levels);
  for (std::size_t k = 0; k < n_levels; ++k) pen[order[k]] = ladder[k];
  return pen;
}

inline std::vector<double> easy_ladder(std::size_t n_levels, std::size_t dim, double sigma, double cap) {
  const double gap = (3.2 + 0.25 * static_cast<double>(dim)) * sigma;
  const double top = std::max(cap, gap + sigma);
  std::vector<double> ladder(n_levels, 0.0);
  for (std::size_t k = 1; k < n_levels; ++k)
    ladder[k] = n_levels > 2 ? gap + (top - gap) * static_cast<double>(k - 1) / static_cast<double>(n_levels - 2) : gap;
  return ladder;
}

// Medium penalties. A few near levels per dimension span a small box of
// competitive configs: a near-tied top five plus a ladder of chasers right
// below it. Every level outside the box costs a shallow, uniform amount --
// cheap to rule out per dimension, where observations pool across the whole
// run, but too shallow for a flat learner to stop sampling any of the ~60
// mediocre arms within the budget.
struct MediumSurface {
  std::vector<std::size_t> near_count;            // per dim
  std::vector<std::vector<double>> far_penalty;   // per dim per level (0 for near levels)
  std::vector<std::vector<std::size_t>> rank;     // per dim per level distance rank
};

inline MediumSurface medium_surface(const HyperParamSpace& space, double sigma, RngStream& rng) {
  MediumSurface s;
  s.near_count.resize(space.dim_count());
  s.far_penalty.resize(space.dim_count());
  s.rank.resize(space.dim_count());
  for (std::size_t d = 0; d < space.dim_count(); ++d) {
    const std::size_t n = space.dim(d).levels.size();
    const std::size_t peak = rng.uniform_index(n);
    // order levels by distance to the peak, ties toward lower index
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const std::size_t da = a > peak ? a - peak : peak - a;
      const std::size_t db = b > peak ? b - peak : peak - b;
      if (da != db) return da < db;
      return a < b;
    });
    s.rank[d].resize(n);
    for (std::size_t k = 0; k < n; ++k) s.rank[d][order[k]] = k;

    s.near_count[d] = std::min<std::size_t>(n - 1, d == 0 ? 3 : 2);
    if (s.near_count[d] < 2) s.near_count[d] = std::min<std::size_t>(n, 2);
    s.far_penalty[d].assign(n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t k = s.rank[d][l];
      if (k >= s.near_count[d])
        s.far_penalty[d][l] =
            (1.6 + 0.17 * static_cast<double>(k - s.near_count[d]) + 0.08 * static_cast<double>(d)) * sigma;
    }
  }
  return s;
}

}  // namespace detail

// Builds a landscape whose reward surface (at the reference reward weight)
// realizes the requested complexity regime. Deterministic in the seed.
inline LandscapeModel gen_landscape(Regime regime, const HyperParamSpace& space, std::uint64_t seed,
                                    const LandscapeOptions& options = {}) {
  LandscapeModel model;
  model.space = space;
  model.regime = regime;
  model.profile = options.profile;
  model.noise_std = options.noise_std > 0.0 ? options.noise_std : detail::regime_default_noise(regime);
  model.reference_w = options.reference_w >= 0.0 ? options.reference_w : detail::regime_default_w(regime);
  model.penalty_threshold = options.penalty_threshold;
  model.seed = seed;

  const std::size_t card = space.cardinality();
  const double sigma = model.noise_std;
  const double w = model.reference_w;
  RngStream rng(substream_seed(seed, 0x1a));

  const std::vector<double> tau = detail::token_fractions(space);

  // penalty of each config relative to the best mean reward, in reward units
  std::vector<double> penalty(card, 0.0);
  if (regime == Regime::Hard) {
    // degenerate plateau: 40% of configs within 0.1*sigma of the best (no
    // method can order them within budget), the rest 1.2..1.5 sigma below
    const std::size_t m = (2 * card + 4) / 5;  // ceil(0.4*card)
    std::vector<std::size_t> order(card);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = card; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    for (std::size_t k = 0; k < card; ++k) {
      if (k < m)
        penalty[order[k]] = m > 1 ? 0.1 * sigma * static_cast<double>(k) / static_cast<double>(m - 1) : 0.0;
      else
        penalty[order[k]] =
            1.2 * sigma + 0.3 * sigma * static_cast<double>(k - m) / static_cast<double>(std::max<std::size_t>(1, card - m - 1));
    }
  } else {
    // additive per-dimension ladders around a seeded peak config
    const double budget = regime == Regime::Easy ? 15.0 * sigma : 0.0;
    std::vector<std::vector<double>> pen_by_dim(space.dim_count());
    std::vector<std::vector<std::size_t>> rank_by_dim(space.dim_count());
    for (std::size_t d = 0; d < space.dim_count(); ++d) {
      const std::size_t n = space.dim(d).levels.size();
      const std::size_t peak = rng.uniform_index(n);
      const std::vector<double> ladder = regime == Regime::Easy
                                             ? detail::easy_ladder(n, d, sigma, budget / static_cast<double>(space.dim_count()))
                                             : detail::medium_ladder(n, d, sigma);
      pen_by_dim[d] = detail::distance_ranks_to_levels(n, peak, ladder);
      // recover each level's distance rank from its ladder slot
      rank_by_dim[d].resize(n);
      std::vector<double> sorted_ladder = ladder;
      for (std::size_t l = 0; l < n; ++l)
        rank_by_dim[d][l] = static_cast<std::size_t>(
            std::find(sorted_ladder.begin(), sorted_ladder.end(), pen_by_dim[d][l]) - sorted_ladder.begin());
    }
    for (std::size_t idx = 0; idx < card; ++idx) {
      const Config c = space.config_at(idx);
      double p = 0.0;
      std::size_t off_peak = 0, far = 0;
      for (std::size_t d = 0; d < space.dim_count(); ++d) {
        p += pen_by_dim[d][c.level_indices[d]];
        const std::size_t rank = rank_by_dim[d][c.level_indices[d]];
        off_peak += rank >= 1;
        far += rank >= 2;
      }
      if (regime == Regime::Medium) {
        // leaving two or more dimensions off-peak only stays competitive in
        // the all-second-best cluster; any farther combination falls away
        if (off_peak >= 2 && far >= 1) p += 2.2 * sigma;
        p = std::min(p, 5.8 * sigma);
      }
      penalty[idx] = p;
    }
  }

  const std::size_t best = static_cast<std::size_t>(
      std::min_element(penalty.begin(), penalty.end()) - penalty.begin());
  const double acc_best = regime == Regime::Easy ? 0.85 : (regime == Regime::Medium ? 0.78 : 0.55);
  const double r_top = w * acc_best - (1.0 - w) * tau[best];

  model.mean_accuracy.resize(card);
  model.mean_tokens.resize(card);
  for (std::size_t idx = 0; idx < card; ++idx) {
    const double r = r_top - penalty[idx];
    const double acc = (r + (1.0 - w) * tau[idx]) / w;
    if (!(acc >= 0.02 && acc <= 0.98))
      throw std::logic_error("gen_landscape: derived accuracy " + fmt_double(acc) + " out of the safe band");
    model.mean_accuracy[idx] = acc;
    model.mean_tokens[idx] = static_cast<std::uint64_t>(std::llround(tau[idx] * static_cast<double>(model.profile.t_max)));
  }
  return model;
}

struct RegimeCheck {
  bool ok = false;
  std::string detail;
};

// Enumerative verification of the regime's separation conditions on the
// analytic reward surface, plus token monotonicity.
inline RegimeCheck verify_regime(const LandscapeModel& model) {
  const RewardParams params = model.reference_params();
  const std::size_t card = model.space.cardinality();
  std::vector<double> r(card);
  for (std::size_t i = 0; i < card; ++i) r[i] = analytic_mean_reward(model, i, params);
  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double sigma = model.noise_std;

  // token monotonicity along every numeric dimension
  for (std::size_t d = 0; d < model.space.dim_count(); ++d) {
    const auto& dim = model.space.dim(d);
    if (!std::all_of(dim.levels.begin(), dim.levels.end(), level_is_numeric)) continue;
    for (std::size_t idx = 0; idx < card; ++idx) {
      const Config c = model.space.config_at(idx);
      if (c.level_indices[d] + 1 >= dim.levels.size()) continue;
      Config up = c;
      ++up.level_indices[d];
      if (model.mean_tokens[model.space.flat_index(up)] < model.mean_tokens[idx])
        return {false, "token surface decreases along dimension '" + dim.name + "'"};
    }
  }

  switch (model.regime) {
    case Regime::Easy: {
      if (std::count(r.begin(), r.end(), sorted[0]) != 1) return {false, "easy: optimum is not unique"};
      if (sorted[0] - sorted[1] < 3.0 * sigma)
        return {false, "easy: best-vs-second gap " + fmt_double(sorted[0] - sorted[1]) + " < 3*noise_std"};
      // unimodal: every non-best config has an uphill single-coordinate move
      const std::size_t best = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
      for (std::size_t idx = 0; idx < card; ++idx) {
        if (idx == best) continue;
        const Config c = model.space.config_at(idx);
        bool uphill = false;
        for (std::size_t d = 0; d < model.space.dim_count() && !uphill; ++d)
          for (int step : {-1, +1}) {
            if (step < 0 && c.level_indices[d] == 0) continue;
            if (step > 0 && c.level_indices[d] + 1 >= model.space.dim(d).levels.size()) continue;
            Config n = c;
            n.level_indices[d] += step;
            if (r[model.space.flat_index(n)] > r[idx]) {
              uphill = true;
              break;
            }
          }
        if (!uphill) return {false, "easy: config " + std::to_string(idx) + " is a spurious local maximum"};
      }
      return {true, "easy: unique optimum, top gap " + fmt_double(sorted[0] - sorted[1])};
    }
    case Regime::Medium: {
      if (card < 6) return {false, "medium: space too small"};
      if (sorted[0] - sorted[4] > 1.5 * sigma)
        return {false, "medium: top-5 spread " + fmt_double(sorted[0] - sorted[4]) + " > 1.5*noise_std"};
      const double below = static_cast<double>(std::count_if(
          r.begin(), r.end(), [&](double v) { return v <= sorted[0] - 2.0 * sigma; }));
      if (below / static_cast<double>(card) < 0.7)
        return {false, "medium: only " + fmt_double(below) + " configs clearly separated below the top cluster"};
      return {true, "medium: top-5 spread " + fmt_double(sorted[0] - sorted[4])};
    }
    case Regime::Hard: {
      const std::size_t m = (2 * card + 4) / 5;
      const auto near = static_cast<std::size_t>(
          std::count_if(r.begin(), r.end(), [&](double v) { return v >= sorted[0] - sigma; }));
      if (near < m)
        return {false, "hard: only " + std::to_string(near) + " configs within noise_std of the maximum (need " +
                           std::to_string(m) + ")"};
      return {true, "hard: " + std::to_string(near) + " configs within noise_std of the maximum"};
    }
  }
  return {false, "unknown regime"};
}

// Correlated two-phase pair for base-model switch studies: phase 2 is phase 1
// with the top-5 reward values rotated among the same five configs, so the
// phase-2 optimum sits inside phase 1's top-5 set.
inline std::pair<LandscapeModel, LandscapeModel> gen_switch_pair(const HyperParamSpace& space, std::uint64_t seed,
                                                                 const LandscapeOptions& options = {}) {
  LandscapeModel phase1 = gen_landscape(Regime::Easy, space, seed, options);
  LandscapeModel phase2 = phase1;

  const RewardParams params = phase1.reference_params();
  const std::size_t card = space.cardinality();
  std::vector<std::size_t> order(card);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = analytic_mean_reward(phase1, a, params), rb = analytic_mean_reward(phase1, b, params);
    if (ra != rb) return ra > rb;
    return a < b;
  });

  std::vector<double> top_r(5);
  for (std::size_t k = 0; k < 5; ++k) top_r[k] = analytic_mean_reward(phase1, order[k], params);
  // rotate: the old maximum lands on the old 5th-ranked config
  for (std::size_t k = 0; k < 5; ++k) {
    const double new_r = top_r[(k + 1) % 5];
    const std::size_t idx = order[k];
    const double tau = static_cast<double>(phase1.mean_tokens[idx]) / static_cast<double>(phase1.profile.t_max);
    phase2.mean_accuracy[idx] = (new_r + (1.0 - params.w) * tau) / params.w;
  }
  return {std::move(phase1), std::move(phase2)};
}

inline nlohmann::json landscape_to_json(const LandscapeModel& model) {
  return {{"regime", regime_to_string(model.regime)},
          {"profile", model.profile.name},
          {"t_max", model.profile.t_max},
          {"noise_std", model.noise_std},
          {"reference_w", model.reference_w},
          {"penalty_threshold", model.penalty_threshold},
          {"seed", model.seed},
          {"space", space_to_json(model.space)},
          {"mean_accuracy", model.mean_accuracy},
          {"mean_tokens", model.mean_tokens}};
}

inline LandscapeModel landscape_from_json(const nlohmann::json& j) {
  LandscapeModel model;
  model.regime = regime_from_string(j.at("regime").get<std::string>());
  model.profile.name = j.at("profile").get<std::string>();
  model.profile.t_max = j.at("t_max").get<std::uint64_t>();
  model.noise_std = j.at("noise_std").get<double>();
  model.reference_w = j.at("reference_w").get<double>();
  model.penalty_threshold = j.at("penalty_threshold").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.space = space_from_json(j.at("space"));
  model.mean_accuracy = j.at("mean_accuracy").get<std::vector<double>>();
  model.mean_tokens = j.at("mean_tokens").get<std::vector<std::uint64_t>>();
  if (model.mean_accuracy.size() != model.space.cardinality() || model.mean_tokens.size() != model.space.cardinality())
    throw std::invalid_argument("landscape: surface size does not match the space cardinality");
  return model;
}

inline void save_landscape(const LandscapeModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write landscape file: " + path);
  f << landscape_to_json(model).dump(2) << '\n';
}

inline LandscapeModel load_landscape(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read landscape file: " + path);
  nlohmann::json j;
  f >> j;
  return landscape_from_json(j);
}

// Samples per-query accuracy around the config's mean (clamped to [0,1]);
// token counts are the config's mean exactly.
class LandscapeEnvironment : public Environment {
 public:
  explicit LandscapeEnvironment(LandscapeModel model) : model_(std::move(model)) {
    desc_ = {"landscape:" + regime_to_string(model_.regime) + ":" + model_.profile.name, model_.space,
             model_.profile.t_max};
  }

  const EnvDescriptor& descriptor() const override { return desc_; }
  const LandscapeModel& model() const { return model_; }

  std::vector<QueryOutcome> evaluate(const Config& config, std::size_t batch_size, RngStream& rng) const override {
    if (batch_size == 0) throw std::invalid_argument("evaluate: batch_size must be positive");
    const std::size_t idx = model_.space.flat_index(config);
    std::vector<QueryOutcome> out;
    out.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
      double acc = model_.mean_accuracy[idx];
      if (model_.noise_std > 0.0) acc = std::clamp(acc + rng.gaussian(0.0, model_.noise_std), 0.0, 1.0);
      out.push_back({acc, model_.mean_tokens[idx]});
    }
    return out;
  }

  bool exhaustive() const override { return true; }

  std::vector<double> exhaustive_mean_rewards(const RewardParams& params) const override {
    std::vector<double> means(model_.space.cardinality());
    for (std::size_t i = 0; i < means.size(); ++i) means[i] = analytic_mean_reward(model_, i, params);
    return means;
  }

 private:
  LandscapeModel model_;
  EnvDescriptor desc_;
};

// Materializes a replay table by sampling n_queries outcomes per config.
inline ReplayTable sample_replay(const LandscapeModel& model, std::size_t n_queries, std::uint64_t seed) {
  if (n_queries == 0) throw std::invalid_argument("sample_replay: n_queries must be positive");
  std::vector<std::string> queries(n_queries);
  for (std::size_t q = 0; q < n_queries; ++q) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "q%03zu", q);
    queries[q] = buf;
  }
  const std::size_t card = model.space.cardinality();
  std::vector<QueryOutcome> records(card * n_queries);
  for (std::size_t c = 0; c < card; ++c) {
    RngStream rng(substream_seed(seed, c));
    for (std::size_t q = 0; q < n_queries; ++q) {
      double acc = model.mean_accuracy[c];
      if (model.noise_std > 0.0) acc = std::clamp(acc + rng.gaussian(0.0, model.noise_std), 0.0, 1.0);
      records[c * n_queries + q] = {acc, model.mean_tokens[c]};
    }
  }
  return ReplayTable(model.space, std::move(queries), std::move(records), model.profile);
}

}  // namespace ragtune
