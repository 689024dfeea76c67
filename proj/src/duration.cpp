#include "ezgreedy/duration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ezg {

std::string to_string(DurationKind kind) {
  switch (kind) {
    case DurationKind::zeta: return "zeta";
    case DurationKind::uniform: return "uniform";
    case DurationKind::geometric: return "geometric";
    case DurationKind::fixed: return "fixed";
  }
  return "?";
}

DurationKind duration_kind_from_string(const std::string& name) {
  if (name == "zeta") return DurationKind::zeta;
  if (name == "uniform") return DurationKind::uniform;
  if (name == "geometric") return DurationKind::geometric;
  if (name == "fixed") return DurationKind::fixed;
  throw std::invalid_argument("unknown duration kind: " + name);
}

DurationDistribution::DurationDistribution(DurationKind kind, double param, int cap,
                                           std::vector<long double> weights)
    : kind_(kind), param_(param), cap_(cap) {
  long double total = 0.0L;
  for (long double w : weights) total += w;
  if (!(total > 0.0L)) throw std::invalid_argument("duration distribution has no mass");

  pmf_.resize(weights.size());
  cdf_.resize(weights.size());
  long double acc = 0.0L;
  long double mean = 0.0L;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const long double p = weights[i] / total;
    acc += p;
    mean += p * static_cast<long double>(i + 1);
    pmf_[i] = static_cast<double>(p);
    cdf_[i] = static_cast<double>(acc);
  }
  // acc == 1 up to rounding; pin the last entry so inverse-CDF lookups of
  // u -> 1 never fall off the table.
  cdf_.back() = 1.0;
  mean_ = static_cast<double>(mean);
}

DurationDistribution DurationDistribution::zeta(double mu, int cap, bool allow_heavy_tail) {
  if (cap < 1) throw std::invalid_argument("zeta: cap must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("zeta: mu must be > 0");
  if (mu <= 1.0 && !allow_heavy_tail)
    throw std::invalid_argument(
        "zeta: mu <= 1 normalizes only through the cap; pass allow_heavy_tail to accept");
  std::vector<long double> w(static_cast<std::size_t>(cap));
  for (int n = 1; n <= cap; ++n)
    w[static_cast<std::size_t>(n - 1)] =
        powl(static_cast<long double>(n), -static_cast<long double>(mu));
  return DurationDistribution(DurationKind::zeta, mu, cap, std::move(w));
}

DurationDistribution DurationDistribution::uniform(int n_max, int cap) {
  if (cap < 1) throw std::invalid_argument("uniform: cap must be >= 1");
  if (n_max < 1) throw std::invalid_argument("uniform: n_max must be >= 1");
  const int support = std::min(n_max, cap);
  std::vector<long double> w(static_cast<std::size_t>(support), 1.0L);
  return DurationDistribution(DurationKind::uniform, n_max, cap, std::move(w));
}

DurationDistribution DurationDistribution::geometric(double lambda, int cap) {
  if (cap < 1) throw std::invalid_argument("geometric: cap must be >= 1");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("geometric: lambda must lie strictly inside (0, 1)");
  std::vector<long double> w(static_cast<std::size_t>(cap));
  long double p = 1.0L;
  for (int n = 1; n <= cap; ++n) {
    w[static_cast<std::size_t>(n - 1)] = p;
    p *= static_cast<long double>(lambda);
  }
  return DurationDistribution(DurationKind::geometric, lambda, cap, std::move(w));
}

DurationDistribution DurationDistribution::fixed(int k, int cap) {
  if (cap < 1) throw std::invalid_argument("fixed: cap must be >= 1");
  if (k < 1 || k > cap) throw std::invalid_argument("fixed: k must lie in [1, cap]");
  std::vector<long double> w(static_cast<std::size_t>(k), 0.0L);
  w.back() = 1.0L;
  return DurationDistribution(DurationKind::fixed, k, cap, std::move(w));
}

int DurationDistribution::sample_from_u(double u) const {
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return static_cast<int>(cdf_.size());
  return static_cast<int>(it - cdf_.begin()) + 1;
}

DurationDistribution DurationSpec::build() const {
  switch (kind) {
    case DurationKind::zeta: return DurationDistribution::zeta(mu, cap, allow_heavy_tail);
    case DurationKind::uniform: return DurationDistribution::uniform(n_max, cap);
    case DurationKind::geometric: return DurationDistribution::geometric(lambda, cap);
    case DurationKind::fixed: return DurationDistribution::fixed(k, cap);
  }
  throw std::invalid_argument("invalid duration kind");
}

double DurationSpec::active_param() const {
  switch (kind) {
    case DurationKind::zeta: return mu;
    case DurationKind::uniform: return static_cast<double>(n_max);
    case DurationKind::geometric: return lambda;
    case DurationKind::fixed: return static_cast<double>(k);
  }
  throw std::invalid_argument("invalid duration kind");
}

}  // namespace ezg
