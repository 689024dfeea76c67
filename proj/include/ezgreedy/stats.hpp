#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ezg {

struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::uint64_t samples = 0;
};

// Upper tail P(X > stat) of a chi-square distribution with df degrees of
// freedom.
double chi_square_tail(double df, double stat);

// Goodness-of-fit of observed counts against expected probabilities.  Bins
// are merged left-to-right until each merged bin has expected count >=
// min_expected (the remainder folds into the last bin), which keeps the
// chi-square approximation honest in thin tails.
Chi2Result chi_square_gof(std::span<const std::uint64_t> observed,
                          std::span<const double> expected_prob, double min_expected = 5.0);

// Two-sample homogeneity test on a 2 x K contingency table (same merging
// rule, applied to the pooled distribution).
Chi2Result chi_square_two_sample(std::span<const std::uint64_t> a,
                                 std::span<const std::uint64_t> b, double min_expected = 5.0);

}  // namespace ezg
