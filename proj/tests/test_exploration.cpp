#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "ezgreedy/exploration.hpp"

using namespace ezg;

TEST_CASE("greedy_action picks the maximum and honors the tie-break mode") {
  SplitMix64 rng(5);
  const std::array<double, 4> q{0.1, 2.0, -3.0, 1.9};
  for (int i = 0; i < 50; ++i) CHECK(greedy_action(q, rng) == 1);

  const std::array<double, 4> tied{1.0, 5.0, 5.0, 0.0};
  for (int i = 0; i < 50; ++i) CHECK(greedy_action(tied, rng, TieBreak::first_index) == 1);
  std::array<int, 4> counts{};
  for (int i = 0; i < 4000; ++i) counts[greedy_action(tied, rng, TieBreak::uniform)]++;
  CHECK(counts[0] == 0);
  CHECK(counts[3] == 0);
  CHECK(counts[1] > 1700);  // expected 2000, sd ~ 31.6
  CHECK(counts[2] > 1700);
}

TEST_CASE("epsilon_greedy_select mixes greedy and uniform actions") {
  SplitMix64 rng(17);
  const std::array<double, 4> q{0.0, 0.0, 3.0, 0.0};
  const double eps = 0.4;
  const int n = 200000;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) counts[epsilon_greedy_select(eps, q, rng)]++;
  // Non-greedy actions each get eps/4 = 0.1; greedy gets 1 - eps + eps/4 = 0.7.
  const double se = std::sqrt(0.1 * 0.9 / n);
  for (int a : {0, 1, 3})
    CHECK(std::abs(counts[a] / static_cast<double>(n) - 0.1) < 5 * se);
  CHECK(std::abs(counts[2] / static_cast<double>(n) - 0.7) < 5 * std::sqrt(0.7 * 0.3 / n));

  // Degenerate mixtures.
  for (int i = 0; i < 200; ++i) CHECK(epsilon_greedy_select(0.0, q, rng) == 2);
  std::array<int, 4> pure{};
  for (int i = 0; i < 4000; ++i) pure[epsilon_greedy_select(1.0, q, rng)]++;
  for (int a = 0; a < 4; ++a) CHECK(pure[a] > 800);
}

TEST_CASE("fixed-duration options repeat the sampled action exactly k times") {
  // epsilon = 1 forces an option at every renewal, so emissions must come in
  // maximal runs of exactly k identical actions.
  const int k = 5;
  EzGreedyPolicy pol(1.0, DurationDistribution::fixed(k));
  SplitMix64 rng(23);
  const std::array<double, 3> q{0.0, 0.0, 0.0};

  int run_len = 0, prev = -1;
  int runs_checked = 0;
  for (int t = 0; t < 100000; ++t) {
    const int a = pol.select(q, rng);
    const bool renewal = !pol.active_option() || pol.active_option()->remaining == k - 1;
    if (renewal) {
      if (prev != -1) {
        CHECK(run_len == k);
        ++runs_checked;
      }
      run_len = 1;
    } else {
      CHECK(a == prev);
      ++run_len;
    }
    prev = a;
  }
  CHECK(runs_checked == 100000 / k - 1);
  CHECK(pol.steps_total() == 100000);
  CHECK(pol.steps_in_option() == 100000);
}

TEST_CASE("the installing selection emits the first of the n repeats") {
  EzGreedyPolicy pol(1.0, DurationDistribution::fixed(3));
  SplitMix64 rng(7);
  const std::array<double, 2> q{0.0, 0.0};
  const int first = pol.select(q, rng);
  REQUIRE(pol.active_option().has_value());
  CHECK(pol.last_was_exploratory());
  CHECK(pol.last_installed_duration() == 3);
  CHECK(pol.active_option()->total_steps == 3);
  CHECK(pol.active_option()->remaining == 2);  // one of the three already emitted
  CHECK(pol.select(q, rng) == first);
  CHECK(pol.select(q, rng) == first);
  CHECK(pol.active_option() == std::nullopt);  // consumed after n emissions
}

TEST_CASE("pseudocode_literal emits one extra repetition per option") {
  EzGreedyPolicy pol(1.0, DurationDistribution::fixed(3), /*pseudocode_literal=*/true);
  SplitMix64 rng(7);
  const std::array<double, 2> q{0.0, 0.0};
  const int first = pol.select(q, rng);
  CHECK(pol.last_installed_duration() == 3);
  int same = 1;
  while (pol.active_option()) {
    CHECK(pol.select(q, rng) == first);
    ++same;
  }
  CHECK(same == 4);  // n + 1 emissions under the literal counter reset
}

TEST_CASE("episode boundaries interrupt an active option") {
  EzGreedyPolicy pol(1.0, DurationDistribution::fixed(10));
  SplitMix64 rng(3);
  const std::array<double, 2> q{0.0, 0.0};
  pol.select(q, rng);
  REQUIRE(pol.active_option().has_value());
  pol.episode_end();
  CHECK(pol.active_option() == std::nullopt);
  // The next selection starts a fresh option rather than resuming the old one.
  pol.select(q, rng);
  REQUIRE(pol.active_option().has_value());
  CHECK(pol.active_option()->remaining == 9);
}

TEST_CASE("greedy selections never install options and are not counted in-option") {
  EzGreedyPolicy pol(0.0, DurationDistribution::zeta(2.0, 100));
  SplitMix64 rng(11);
  const std::array<double, 3> q{0.0, 1.0, 0.5};
  for (int t = 0; t < 1000; ++t) {
    CHECK(pol.select(q, rng) == 1);
    CHECK_FALSE(pol.last_was_exploratory());
    CHECK(pol.active_option() == std::nullopt);
  }
  CHECK(pol.steps_total() == 1000);
  CHECK(pol.steps_in_option() == 0);
}

TEST_CASE("fraction of steps spent inside options matches renewal theory") {
  // Renewal argument: each renewal is a greedy step with probability 1-eps or
  // an option worth k in-option steps with probability eps, so the long-run
  // in-option fraction is eps*k / (1 - eps + eps*k).
  struct Case {
    double eps;
    int k;
    double expect;
  };
  // 0.3*5/(0.7+1.5) = 15/22; 0.1*10/(0.9+1.0) = 10/19 (50-digit references).
  const Case cases[] = {{0.3, 5, 0.68181818181818181818},
                        {0.1, 10, 0.52631578947368421053}};
  for (const auto& c : cases) {
    EzGreedyPolicy pol(c.eps, DurationDistribution::fixed(c.k));
    SplitMix64 rng(31);
    const std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};
    const int n = 400000;
    for (int t = 0; t < n; ++t) pol.select(q, rng);
    const double frac = static_cast<double>(pol.steps_in_option()) / pol.steps_total();
    CHECK(frac == doctest::Approx(c.expect).epsilon(0.01));
  }
}

TEST_CASE("option actions are sampled uniformly, independent of q-values") {
  EzGreedyPolicy pol(1.0, DurationDistribution::fixed(1));
  SplitMix64 rng(13);
  const std::array<double, 3> q{100.0, -5.0, 3.0};  // greedy would always take 0
  std::array<int, 3> counts{};
  const int n = 90000;
  for (int t = 0; t < n; ++t) counts[pol.select(q, rng)]++;
  for (int a = 0; a < 3; ++a) {
    CHECK(counts[a] > 28500);  // expected 30000, sd ~ 141
    CHECK(counts[a] < 31500);
  }
}

TEST_CASE("zero epsilon with fixed(1) reduces to plain greedy selection") {
  // fixed(1) + epsilon recovers classic epsilon-greedy: options last one step,
  // so consecutive selections are independent.  Compare empirical marginals.
  const double eps = 0.25;
  EzGreedyPolicy pol(eps, DurationDistribution::fixed(1));
  SplitMix64 rng(41);
  const std::array<double, 2> q{0.0, 1.0};
  const int n = 200000;
  int greedy = 0;
  for (int t = 0; t < n; ++t) {
    greedy += (pol.select(q, rng) == 1);
    CHECK(pol.active_option() == std::nullopt);  // 1-step options never persist
  }
  const double expect = 1.0 - eps + eps / 2.0;  // 0.875
  CHECK(std::abs(greedy / static_cast<double>(n) - expect) <
        5 * std::sqrt(expect * (1 - expect) / n));
}
