#pragma once

#include <string>
#include <vector>

#include "ezgreedy/rng.hpp"

namespace ezg {

inline constexpr int kDefaultDurationCap = 10000;

enum class DurationKind { zeta, uniform, geometric, fixed };

std::string to_string(DurationKind kind);
// Accepts the names produced by to_string; throws std::invalid_argument.
DurationKind duration_kind_from_string(const std::string& name);

// Distribution over option durations n in {1, ..., cap}.  All kinds store an
// explicit pmf/cdf table; sampling is inverse-CDF via binary search, so one
// uniform draw is consumed per sample for every kind.
class DurationDistribution {
 public:
  // pmf(n) = n^-mu / sum_{m<=cap} m^-mu.  mu <= 1 is only meaningful because
  // of the cap truncation; it must be opted into explicitly.
  static DurationDistribution zeta(double mu, int cap = kDefaultDurationCap,
                                   bool allow_heavy_tail = false);
  // pmf(n) = 1/n_max for n <= min(n_max, cap), renormalized if cap < n_max.
  static DurationDistribution uniform(int n_max, int cap = kDefaultDurationCap);
  // pmf(n) proportional to lambda^(n-1), truncated at cap.  lambda in (0, 1).
  static DurationDistribution geometric(double lambda, int cap = kDefaultDurationCap);
  // All mass on n = k; recovers one-step exploration for k = 1.
  static DurationDistribution fixed(int k, int cap = kDefaultDurationCap);

  DurationKind kind() const { return kind_; }
  double param() const { return param_; }
  int cap() const { return cap_; }

  const std::vector<double>& pmf() const { return pmf_; }
  const std::vector<double>& cdf() const { return cdf_; }
  double mean() const { return mean_; }

  // Draws u from (0, 1] so values with zero mass (e.g. the prefix of a fixed
  // distribution) can never be selected.
  int sample(SplitMix64& rng) const { return sample_from_u(1.0 - rng.next_double()); }
  // Smallest n with cdf(n) >= u, for u in (0, 1]; exposed so the inverse-CDF
  // step is testable against hand-picked uniforms.
  int sample_from_u(double u) const;

 private:
  DurationDistribution(DurationKind kind, double param, int cap,
                       std::vector<long double> weights);

  DurationKind kind_;
  double param_;
  int cap_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

// Config-facing description of a duration distribution; one parameter field
// per kind so serialized configs stay self-describing.
struct DurationSpec {
  DurationKind kind = DurationKind::zeta;
  double mu = 2.0;        // zeta
  int n_max = 10;         // uniform
  double lambda = 0.9;    // geometric
  int k = 1;              // fixed
  int cap = kDefaultDurationCap;
  bool allow_heavy_tail = false;

  DurationDistribution build() const;
  // The parameter that belongs to `kind`, for reports and sweeps.
  double active_param() const;
};

}  // namespace ezg
