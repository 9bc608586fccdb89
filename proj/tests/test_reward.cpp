#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "ragtune/reward.hpp"
#include "ragtune/rng.hpp"

using namespace ragtune;

TEST_CASE("apply_penalty maps inaccurate responses to -1") {
  RewardParams p{0.5, 1585, 0.0};
  CHECK(apply_penalty(0.0, p) == -1.0);
  CHECK(apply_penalty(1.0, p) == 1.0);
  RewardParams half{0.5, 1585, 0.5};
  CHECK(apply_penalty(0.3, half) == -1.0);
  CHECK(apply_penalty(0.6, half) == 0.6);
  CHECK_THROWS_AS(apply_penalty(1.2, p), std::domain_error);
  CHECK_THROWS_AS(apply_penalty(-0.1, p), std::domain_error);
}

TEST_CASE("compute_reward plugs into the weighted accuracy/token form") {
  CHECK(compute_reward({1.0, 0}, {0.9, 1585, 0.0}) == 0.9);
  CHECK(compute_reward({0.0, 1585}, {0.5, 1585, 0.0}) == -1.0);  // penalized worst case
  CHECK_THAT(compute_reward({1.0, 1585}, {0.1, 1585, 0.0}), Catch::Matchers::WithinAbs(-0.8, 1e-15));
}

TEST_CASE("compute_reward clamps token outliers to t_max") {
  const double at_limit = compute_reward({0.8, 1585}, {0.5, 1585, 0.0});
  const double beyond = compute_reward({0.8, 4000}, {0.5, 1585, 0.0});
  CHECK(beyond == at_limit);
  CHECK(tokens_exceed_limit({0.8, 4000}, {0.5, 1585, 0.0}));
  CHECK_FALSE(tokens_exceed_limit({0.8, 1585}, {0.5, 1585, 0.0}));
}

TEST_CASE("batch_reward is the arithmetic mean of per-query rewards") {
  RewardParams p{0.9, 1000, 0.0};
  std::vector<QueryOutcome> one{{0.5, 100}};
  const double r1 = compute_reward(one[0], p);
  CHECK(batch_reward(one, p) == r1);

  // rewards 0.9 and -1 average to -0.05
  RewardParams q{0.9, 1000, 0.0};
  std::vector<QueryOutcome> two{{1.0, 0}, {0.0, 1000}};
  CHECK_THAT(batch_reward(two, q), Catch::Matchers::WithinAbs((0.9 + (-1.0)) / 2.0, 1e-15));

  std::vector<QueryOutcome> empty;
  CHECK_THROWS_AS(batch_reward(empty, p), std::invalid_argument);

  RngStream rng(3);
  std::vector<QueryOutcome> batch;
  for (int i = 0; i < 4; ++i) batch.push_back({rng.uniform01(), rng.uniform_index(1200)});
  double direct = 0.0;
  for (const auto& o : batch) direct += compute_reward(o, p);
  direct /= batch.size();
  CHECK_THAT(batch_reward(batch, p), Catch::Matchers::WithinAbs(direct, 1e-12));
}

TEST_CASE("reward bounds, monotonicity and weight extremes hold under fuzz") {
  RngStream rng(2024);
  for (int i = 0; i < 20000; ++i) {
    RewardParams p;
    p.w = rng.uniform01();
    p.t_max = 1 + rng.uniform_index(4000);
    p.penalty_threshold = rng.uniform01();
    QueryOutcome o{rng.uniform01(), rng.uniform_index(static_cast<std::size_t>(p.t_max + p.t_max / 4 + 1))};

    const double r = compute_reward(o, p);
    CHECK(r >= -1.0 - 1e-12);
    CHECK(r <= p.w + 1e-12);

    // non-increasing in tokens
    QueryOutcome more = o;
    more.tokens += 1 + rng.uniform_index(200);
    CHECK(compute_reward(more, p) <= r + 1e-12);

    // non-decreasing in post-penalty accuracy
    QueryOutcome better = o;
    better.accuracy = o.accuracy + (1.0 - o.accuracy) * rng.uniform01();
    if (apply_penalty(better.accuracy, p) >= apply_penalty(o.accuracy, p)) {
      CHECK(compute_reward(better, p) >= r - 1e-12);
    }

    // w extremes
    RewardParams wa = p;
    wa.w = 1.0;
    CHECK(compute_reward({o.accuracy, 0}, wa) == compute_reward({o.accuracy, p.t_max}, wa));
    RewardParams wt = p;
    wt.w = 0.0;
    CHECK(compute_reward({1.0, o.tokens}, wt) == compute_reward({0.5, o.tokens}, wt));
  }
}

TEST_CASE("batch_reward is linear under concatenation") {
  RngStream rng(9);
  RewardParams p{0.5, 1585, 0.0};
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<QueryOutcome> a, b;
    const std::size_t na = 1 + rng.uniform_index(6), nb = 1 + rng.uniform_index(6);
    for (std::size_t i = 0; i < na; ++i) a.push_back({rng.uniform01(), rng.uniform_index(1585)});
    for (std::size_t i = 0; i < nb; ++i) b.push_back({rng.uniform01(), rng.uniform_index(1585)});
    std::vector<QueryOutcome> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const double weighted =
        (batch_reward(a, p) * na + batch_reward(b, p) * nb) / static_cast<double>(na + nb);
    CHECK_THAT(batch_reward(both, p), Catch::Matchers::WithinAbs(weighted, 1e-12));
  }
}
