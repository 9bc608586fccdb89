#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <map>
#include <set>
#include <vector>

#include "ragtune/hier.hpp"

using namespace ragtune;

namespace {

// Independent replay oracle: recomputes all statistics from the ordered
// trial log with plain sums, no Welford.
struct LogReplayOracle {
  struct Sum {
    std::uint64_t n = 0;
    double total = 0.0;
    double mean() const { return n ? total / static_cast<double>(n) : 0.0; }
  };
  std::vector<Sum> high;
  std::vector<std::vector<Sum>> low;
  std::map<std::size_t, Sum> configs;

  explicit LogReplayOracle(const HyperParamSpace& space) : high(space.dim_count()) {
    for (const auto& d : space.dims()) low.emplace_back(d.levels.size());
  }

  void feed(const HyperParamSpace& space, std::size_t dim, const Config& evaluated, double reward,
            UpdateScope scope) {
    high[dim].n++;
    high[dim].total += reward;
    if (scope == UpdateScope::AllActive) {
      for (std::size_t d = 0; d < space.dim_count(); ++d) {
        low[d][evaluated.level_indices[d]].n++;
        low[d][evaluated.level_indices[d]].total += reward;
      }
    } else {
      low[dim][evaluated.level_indices[dim]].n++;
      low[dim][evaluated.level_indices[dim]].total += reward;
    }
    auto& c = configs[space.flat_index(evaluated)];
    c.n++;
    c.total += reward;
  }
};

}  // namespace

TEST_CASE("construction matches the space shape and starts at the midpoint") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});
  CHECK(h.high_stats().size() == 3);
  REQUIRE(h.low_stats().size() == 3);
  CHECK(h.low_stats()[0].size() == 5);
  CHECK(h.low_stats()[1].size() == 5);
  CHECK(h.low_stats()[2].size() == 3);
  CHECK(h.current_config().level_indices == std::vector<std::size_t>{2, 2, 1});
  CHECK(h.total_trials() == 0);
}

TEST_CASE("select proposes a config differing in at most the pulled coordinate") {
  const auto space = default_rag_space(true);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    HierBandit h(space, HierParams{});
    RngStream rng(seed);
    const auto sel = h.select(rng);
    std::size_t diffs = 0;
    for (std::size_t d = 0; d < space.dim_count(); ++d)
      diffs += sel.proposed.level_indices[d] != h.current_config().level_indices[d];
    CHECK(diffs <= 1);
    if (diffs == 1) CHECK(sel.proposed.level_indices[sel.dim] == sel.level);
  }
}

TEST_CASE("greedy high level picks the best-mean dimension at alpha_h 0") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{0.0, 1.0, UpdateScope::AllActive});
  // shape high-level stats through updates: dim0 mean 0.9, dims 1-2 mean -0.5 (5 pulls each)
  Config c = h.current_config();
  for (int i = 0; i < 5; ++i) h.update(0, c.level_indices[0], c, 0.9);
  for (int i = 0; i < 5; ++i) h.update(1, c.level_indices[1], c, -0.5);
  for (int i = 0; i < 5; ++i) h.update(2, c.level_indices[2], c, -0.5);
  CHECK(h.total_trials() == 15);
  RngStream rng(1);
  for (int i = 0; i < 10; ++i) CHECK(h.select(rng).dim == 0);
}

TEST_CASE("first update credits the pulled arm, all active levels and the config") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});
  // evaluated = (top_k=3, compression=0.5, embedding=mpnet) via dimension 0
  Config eval;
  eval.level_indices = {1, 1, 0};
  h.update(0, 1, eval, 0.4);

  CHECK(h.high_stats()[0].pulls == 1);
  CHECK(h.high_stats()[0].mean_reward == 0.4);
  CHECK(h.high_stats()[1].pulls == 0);
  CHECK(h.low_stats()[0][1].pulls == 1);
  CHECK(h.low_stats()[0][1].mean_reward == 0.4);
  CHECK(h.low_stats()[1][1].pulls == 1);
  CHECK(h.low_stats()[2][0].pulls == 1);
  REQUIRE(h.config_stats().size() == 1);
  const auto& [idx, st] = *h.config_stats().begin();
  CHECK(idx == space.flat_index(eval));
  CHECK(st.pulls == 1);
  CHECK(st.mean_reward == 0.4);
  CHECK(h.current_config() == eval);

  h.update(0, 1, eval, -0.4);
  CHECK(h.config_stats().begin()->second.pulls == 2);
  CHECK_THAT(h.config_stats().begin()->second.mean_reward, Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("update rejects mismatched selections") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});
  Config eval;
  eval.level_indices = {1, 1, 0};
  CHECK_THROWS_AS(h.update(0, 2, eval, 0.1), std::invalid_argument);  // level not carried by config
  CHECK_THROWS_AS(h.update(5, 0, eval, 0.1), std::invalid_argument);  // bad dimension
  Config bad;
  bad.level_indices = {1, 1};
  CHECK_THROWS_AS(h.update(0, 1, bad, 0.1), std::invalid_argument);
}

TEST_CASE("a 500-trial trajectory matches the independent log-replay oracle") {
  const auto space = default_rag_space(true);
  for (UpdateScope scope : {UpdateScope::AllActive, UpdateScope::PulledOnly}) {
    HierBandit h(space, HierParams{1.0, 1.0, scope});
    LogReplayOracle oracle(space);
    RngStream rng(1234);
    for (int t = 0; t < 500; ++t) {
      const auto sel = h.select(rng);
      const double reward = rng.gaussian(0.1, 0.4);
      h.update(sel, reward);
      oracle.feed(space, sel.dim, sel.proposed, reward, scope);
    }
    for (std::size_t d = 0; d < space.dim_count(); ++d) {
      CHECK(h.high_stats()[d].pulls == oracle.high[d].n);
      CHECK_THAT(h.high_stats()[d].mean_reward, Catch::Matchers::WithinAbs(oracle.high[d].mean(), 1e-9));
      for (std::size_t l = 0; l < space.dim(d).levels.size(); ++l) {
        CHECK(h.low_stats()[d][l].pulls == oracle.low[d][l].n);
        CHECK_THAT(h.low_stats()[d][l].mean_reward, Catch::Matchers::WithinAbs(oracle.low[d][l].mean(), 1e-9));
      }
    }
    REQUIRE(h.config_stats().size() == oracle.configs.size());
    for (const auto& [idx, st] : h.config_stats()) {
      CHECK(st.pulls == oracle.configs.at(idx).n);
      CHECK_THAT(st.mean_reward, Catch::Matchers::WithinAbs(oracle.configs.at(idx).mean(), 1e-9));
    }
  }
}

TEST_CASE("pull accounting: high-level pulls sum to T; per-dimension low pulls too under all_active") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});
  RngStream rng(9);
  const std::uint64_t T = 300;
  for (std::uint64_t t = 0; t < T; ++t) {
    const auto sel = h.select(rng);
    h.update(sel, rng.gaussian(0.0, 0.3));
  }
  std::uint64_t high_sum = 0;
  for (const auto& a : h.high_stats()) high_sum += a.pulls;
  CHECK(high_sum == T);
  for (const auto& dim : h.low_stats()) {
    std::uint64_t low_sum = 0;
    for (const auto& a : dim) low_sum += a.pulls;
    CHECK(low_sum == T);
  }
  CHECK(h.total_trials() == T);
}

TEST_CASE("single-coordinate change holds along a whole trajectory") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});
  RngStream rng(77);
  Config prev = h.current_config();
  for (int t = 0; t < 200; ++t) {
    const auto sel = h.select(rng);
    std::size_t diffs = 0;
    for (std::size_t d = 0; d < space.dim_count(); ++d) diffs += sel.proposed.level_indices[d] != prev.level_indices[d];
    CHECK(diffs <= 1);
    h.update(sel, rng.gaussian(0.0, 0.2));
    prev = h.current_config();
  }
}

TEST_CASE("forced exploration covers dimensions and levels") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{1.0, 1.0, UpdateScope::AllActive});
  RngStream rng(3);
  std::set<std::size_t> dims_in_first_rounds;
  std::uint64_t total_levels = 0;
  for (const auto& d : space.dims()) total_levels += d.levels.size();
  for (std::uint64_t t = 0; t < total_levels; ++t) {
    const auto sel = h.select(rng);
    if (t < space.dim_count()) dims_in_first_rounds.insert(sel.dim);
    h.update(sel, rng.gaussian(0.0, 0.1));
  }
  // every dimension pulled at high level within the first dim-count trials
  CHECK(dims_in_first_rounds.size() == space.dim_count());
  // every low-level arm of every pulled dimension explored
  for (std::size_t d = 0; d < space.dim_count(); ++d) {
    if (h.high_stats()[d].pulls == 0) continue;
    for (const auto& a : h.low_stats()[d]) CHECK(a.pulls >= 1);
  }
}

TEST_CASE("identical seeds reproduce the trajectory") {
  const auto space = default_rag_space(true);
  auto run = [&](std::uint64_t seed) {
    HierBandit h(space, HierParams{});
    RngStream rng(seed);
    std::vector<std::size_t> visited;
    for (int t = 0; t < 150; ++t) {
      const auto sel = h.select(rng);
      visited.push_back(space.flat_index(sel.proposed));
      h.update(sel, rng.gaussian(0.0, 0.25));
    }
    return visited;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("rank_configs sorts visited configs and fills with composite scores") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});

  Config a, b;
  a.level_indices = {0, 0, 0};
  b.level_indices = {1, 0, 0};
  h.update(0, 0, a, 0.9);
  h.update(0, 1, b, 0.1);

  auto ranking = h.rank_configs(2);
  REQUIRE(ranking.size() == space.cardinality());
  CHECK(ranking[0].config_index == space.flat_index(a));
  CHECK(ranking[1].config_index == space.flat_index(b));
  // unvisited entries follow, composite or -inf
  CHECK(ranking[2].score <= ranking[1].score + 1.0);  // two-block structure, no global monotonicity

  CHECK_THROWS_AS(h.rank_configs(0), std::invalid_argument);
  CHECK_THROWS_AS(h.rank_configs(space.cardinality() + 1), std::invalid_argument);
}

TEST_CASE("rank_configs fill rule: one visited config, slots 2..x from composite") {
  const auto space = default_rag_space(true);
  HierBandit h(space, HierParams{});
  Config a;
  a.level_indices = {0, 0, 0};
  h.update(0, 0, a, 0.5);

  auto ranking = h.rank_configs(3);
  CHECK(ranking[0].config_index == space.flat_index(a));
  // only levels (0,0,0) have been credited, so the only finite composite
  // belongs to config (0,0,0) itself, which is visited; the fill entries are
  // all -inf and ordered by config index
  CHECK(ranking[1].score == -std::numeric_limits<double>::infinity());
  CHECK(ranking[1].config_index < ranking[2].config_index);
}

TEST_CASE("full visitation ranking equals a direct sort of config means") {
  const auto space = default_rag_space(false);  // 25 configs
  HierBandit h(space, HierParams{});
  RngStream rng(21);
  std::map<std::size_t, std::pair<std::uint64_t, double>> sums;
  // visit every config directly (dimension 0 pulled, config set explicitly)
  for (std::size_t idx = 0; idx < space.cardinality(); ++idx) {
    const Config c = space.config_at(idx);
    for (int rep = 0; rep < 3; ++rep) {
      const double r = rng.gaussian(0.0, 1.0);
      h.update(0, c.level_indices[0], c, r);
      sums[idx].first++;
      sums[idx].second += r;
    }
  }
  auto ranking = h.rank_configs(space.cardinality());
  REQUIRE(ranking.size() == space.cardinality());
  for (std::size_t i = 1; i < ranking.size(); ++i) {
    const double prev = sums[ranking[i - 1].config_index].second / 3.0;
    const double cur = sums[ranking[i].config_index].second / 3.0;
    CHECK(prev >= cur);
  }
}
