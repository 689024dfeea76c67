#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ezgreedy/duration.hpp"

using namespace ezg;

namespace {
double pmf_at(const DurationDistribution& d, int n) {
  return d.pmf().at(static_cast<std::size_t>(n - 1));
}
double cdf_at(const DurationDistribution& d, int n) {
  return d.cdf().at(static_cast<std::size_t>(n - 1));
}
}  // namespace

TEST_CASE("every distribution kind normalizes to one") {
  std::vector<DurationDistribution> dists;
  for (double mu : {1.5, 2.0, 3.0, 6.0}) dists.push_back(DurationDistribution::zeta(mu, 10000));
  for (int n_max : {1, 10, 50, 10000}) dists.push_back(DurationDistribution::uniform(n_max));
  for (double lam : {0.1, 0.9, 0.999}) dists.push_back(DurationDistribution::geometric(lam));
  for (int k : {1, 7, 10000}) dists.push_back(DurationDistribution::fixed(k));
  dists.push_back(DurationDistribution::zeta(0.5, 100, /*allow_heavy_tail=*/true));

  for (const auto& d : dists) {
    const double total = std::accumulate(d.pmf().begin(), d.pmf().end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(d.cdf().back() == 1.0);
    // cdf must be the running sum of the pmf and non-decreasing.
    double acc = 0.0;
    bool monotone = true, consistent = true;
    for (std::size_t i = 0; i < d.pmf().size(); ++i) {
      acc += d.pmf()[i];
      consistent &= std::abs(acc - d.cdf()[i]) < 1e-9;
      if (i > 0) monotone &= d.cdf()[i] >= d.cdf()[i - 1];
    }
    CHECK(monotone);
    CHECK(consistent);
  }
}

TEST_CASE("power-law duration pmf matches closed-form reference values") {
  // Reference values computed with 50-digit arithmetic for mu = 2, cap 10^4:
  // the normalizer is H = sum_{n<=1e4} n^-2 = 1.6448340718480597698.
  const auto z = DurationDistribution::zeta(2.0, 10000);
  CHECK(pmf_at(z, 1) == doctest::Approx(0.60796405978898897663).epsilon(1e-14));
  CHECK(pmf_at(z, 2) == doctest::Approx(0.15199101494724724416).epsilon(1e-14));
  CHECK(pmf_at(z, 10) == doctest::Approx(0.0060796405978898897663).epsilon(1e-14));
  CHECK(cdf_at(z, 9) == doctest::Approx(0.93612344097209064956).epsilon(1e-14));
  // Tail mass P(n >= 10) = 1 - cdf(9).
  CHECK(1.0 - cdf_at(z, 9) == doctest::Approx(0.063876559027909350445).epsilon(1e-12));
  CHECK(z.mean() == doctest::Approx(5.9505127012887562155).epsilon(1e-13));

  // Tiny cap makes the normalization visible by hand: 1 and 1/4 -> 0.8, 0.2.
  const auto z2 = DurationDistribution::zeta(2.0, 2);
  REQUIRE(z2.pmf().size() == 2);
  CHECK(pmf_at(z2, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(pmf_at(z2, 2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(z2.mean() == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("uniform and geometric means match closed forms") {
  CHECK(DurationDistribution::uniform(10).mean() == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(DurationDistribution::uniform(1).mean() == doctest::Approx(1.0));
  // Truncated geometric, lambda = 0.5, cap = 3: weights 1, .5, .25 -> /1.75.
  const auto g = DurationDistribution::geometric(0.5, 3);
  CHECK(pmf_at(g, 1) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(pmf_at(g, 2) == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
  CHECK(pmf_at(g, 3) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(g.mean() == doctest::Approx((4.0 + 2.0 * 2.0 + 3.0) / 7.0).epsilon(1e-14));
}

TEST_CASE("inverse-CDF sampling picks the smallest n with cdf >= u") {
  const auto z2 = DurationDistribution::zeta(2.0, 2);  // cdf = (0.8, 1.0)
  CHECK(z2.sample_from_u(1e-12) == 1);
  CHECK(z2.sample_from_u(0.8) == 1);   // boundary belongs to the lower value
  CHECK(z2.sample_from_u(0.8000001) == 2);
  CHECK(z2.sample_from_u(1.0) == 2);

  const auto f = DurationDistribution::fixed(5);
  for (double u : {1e-9, 0.3, 0.9999, 1.0}) CHECK(f.sample_from_u(u) == 5);

  const auto uni = DurationDistribution::uniform(4);  // cdf = .25 .5 .75 1
  CHECK(uni.sample_from_u(0.25) == 1);
  CHECK(uni.sample_from_u(0.26) == 2);
  CHECK(uni.sample_from_u(0.75) == 3);
  CHECK(uni.sample_from_u(0.76) == 4);
}

TEST_CASE("sampling never leaves the support") {
  SplitMix64 rng(99);
  const auto z = DurationDistribution::zeta(2.0, 8);
  const auto f = DurationDistribution::fixed(3);
  for (int i = 0; i < 20000; ++i) {
    const int n = z.sample(rng);
    REQUIRE(n >= 1);
    REQUIRE(n <= 8);
    REQUIRE(f.sample(rng) == 3);
  }
}

TEST_CASE("cap truncates and renormalizes the uniform support") {
  const auto u = DurationDistribution::uniform(50, 10);
  REQUIRE(u.pmf().size() == 10);
  for (int n = 1; n <= 10; ++n) CHECK(pmf_at(u, n) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("parameter validation rejects degenerate inputs") {
  CHECK_THROWS_AS(DurationDistribution::zeta(1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(DurationDistribution::zeta(0.0, 100, true), std::invalid_argument);
  CHECK_NOTHROW(DurationDistribution::zeta(1.0, 100, /*allow_heavy_tail=*/true));
  CHECK_THROWS_AS(DurationDistribution::geometric(1.0), std::invalid_argument);
  CHECK_THROWS_AS(DurationDistribution::geometric(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DurationDistribution::uniform(0), std::invalid_argument);
  CHECK_THROWS_AS(DurationDistribution::fixed(0), std::invalid_argument);
  CHECK_THROWS_AS(DurationDistribution::fixed(11, 10), std::invalid_argument);
  CHECK_THROWS_AS(DurationDistribution::zeta(2.0, 0), std::invalid_argument);
}

TEST_CASE("fixed(1) is the degenerate single-step distribution") {
  const auto f = DurationDistribution::fixed(1);
  REQUIRE(f.pmf().size() == 1);
  CHECK(pmf_at(f, 1) == 1.0);
  CHECK(f.mean() == 1.0);
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) CHECK(f.sample(rng) == 1);
}

TEST_CASE("duration specs build the distribution selected by kind") {
  DurationSpec spec;
  spec.kind = DurationKind::uniform;
  spec.n_max = 7;
  const auto d = spec.build();
  CHECK(d.kind() == DurationKind::uniform);
  CHECK(d.pmf().size() == 7);
  CHECK(spec.active_param() == 7.0);

  spec.kind = DurationKind::zeta;
  spec.mu = 2.5;
  CHECK(spec.active_param() == 2.5);
  CHECK(spec.build().param() == 2.5);

  spec.kind = DurationKind::geometric;
  spec.lambda = 0.25;
  CHECK(spec.active_param() == 0.25);

  spec.kind = DurationKind::fixed;
  spec.k = 4;
  CHECK(spec.active_param() == 4.0);
  CHECK(spec.build().mean() == 4.0);
}

TEST_CASE("kind names round-trip through their string forms") {
  for (auto kind : {DurationKind::zeta, DurationKind::uniform, DurationKind::geometric,
                    DurationKind::fixed}) {
    CHECK(duration_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(duration_kind_from_string("pareto"), std::invalid_argument);
}
