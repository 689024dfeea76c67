#include "ezgreedy/stats.hpp"

#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace ezg {

double chi_square_tail(double df, double stat) {
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

namespace {

// Merge adjacent bins until each has expected mass >= min_expected under the
// total count; returns (observed, expected) per merged bin.
void merge_bins(std::span<const std::uint64_t> observed, std::span<const double> expected_prob,
                double total, double min_expected, std::vector<double>& obs_out,
                std::vector<double>& exp_out) {
  double acc_obs = 0.0;
  double acc_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    acc_obs += static_cast<double>(observed[i]);
    acc_exp += expected_prob[i] * total;
    if (acc_exp >= min_expected) {
      obs_out.push_back(acc_obs);
      exp_out.push_back(acc_exp);
      acc_obs = acc_exp = 0.0;
    }
  }
  if (acc_exp > 0.0 || acc_obs > 0.0) {
    if (!exp_out.empty()) {
      obs_out.back() += acc_obs;
      exp_out.back() += acc_exp;
    } else {
      obs_out.push_back(acc_obs);
      exp_out.push_back(acc_exp);
    }
  }
}

}  // namespace

Chi2Result chi_square_gof(std::span<const std::uint64_t> observed,
                          std::span<const double> expected_prob, double min_expected) {
  if (observed.size() != expected_prob.size())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  if (observed.empty()) throw std::invalid_argument("chi_square_gof: no bins");
  const std::uint64_t n = std::accumulate(observed.begin(), observed.end(), std::uint64_t{0});
  if (n == 0) throw std::invalid_argument("chi_square_gof: no samples");

  std::vector<double> obs, exp;
  merge_bins(observed, expected_prob, static_cast<double>(n), min_expected, obs, exp);
  if (obs.size() < 2) throw std::invalid_argument("chi_square_gof: fewer than 2 usable bins");

  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - exp[i];
    if (exp[i] > 0.0) stat += d * d / exp[i];
  }
  const int df = static_cast<int>(obs.size()) - 1;
  return {stat, df, chi_square_tail(df, stat), n};
}

Chi2Result chi_square_two_sample(std::span<const std::uint64_t> a,
                                 std::span<const std::uint64_t> b, double min_expected) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_square_two_sample: size mismatch");
  if (a.empty()) throw std::invalid_argument("chi_square_two_sample: no bins");
  const std::uint64_t na = std::accumulate(a.begin(), a.end(), std::uint64_t{0});
  const std::uint64_t nb = std::accumulate(b.begin(), b.end(), std::uint64_t{0});
  if (na == 0 || nb == 0) throw std::invalid_argument("chi_square_two_sample: empty sample");

  const double total = static_cast<double>(na + nb);
  std::vector<double> pooled(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    pooled[i] = static_cast<double>(a[i] + b[i]) / total;

  // Merge on the pooled distribution, then apply identical bin boundaries to
  // both samples by re-merging with the same rule and totals.
  std::vector<double> merged_a, merged_b, exp_a, exp_b;
  {
    double acc_a = 0.0, acc_b = 0.0, acc_p = 0.0;
    const double min_total = min_expected;
    for (std::size_t i = 0; i < a.size(); ++i) {
      acc_a += static_cast<double>(a[i]);
      acc_b += static_cast<double>(b[i]);
      acc_p += pooled[i];
      // Require the expectation in the smaller sample to clear the floor.
      const double min_n = static_cast<double>(na < nb ? na : nb);
      if (acc_p * min_n >= min_total) {
        merged_a.push_back(acc_a);
        merged_b.push_back(acc_b);
        exp_a.push_back(acc_p * static_cast<double>(na));
        exp_b.push_back(acc_p * static_cast<double>(nb));
        acc_a = acc_b = acc_p = 0.0;
      }
    }
    if (acc_p > 0.0) {
      if (!exp_a.empty()) {
        merged_a.back() += acc_a;
        merged_b.back() += acc_b;
        exp_a.back() += acc_p * static_cast<double>(na);
        exp_b.back() += acc_p * static_cast<double>(nb);
      } else {
        merged_a.push_back(acc_a);
        merged_b.push_back(acc_b);
        exp_a.push_back(acc_p * static_cast<double>(na));
        exp_b.push_back(acc_p * static_cast<double>(nb));
      }
    }
  }
  if (merged_a.size() < 2)
    throw std::invalid_argument("chi_square_two_sample: fewer than 2 usable bins");

  double stat = 0.0;
  for (std::size_t i = 0; i < merged_a.size(); ++i) {
    const double da = merged_a[i] - exp_a[i];
    const double db = merged_b[i] - exp_b[i];
    if (exp_a[i] > 0.0) stat += da * da / exp_a[i];
    if (exp_b[i] > 0.0) stat += db * db / exp_b[i];
  }
  const int df = static_cast<int>(merged_a.size()) - 1;
  return {stat, df, chi_square_tail(df, stat), na + nb};
}

}  // namespace ezg
