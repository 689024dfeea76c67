#pragma once

#include <span>
#include <vector>

#include "ezgreedy/fourier.hpp"
#include "ezgreedy/rng.hpp"

namespace ezg {

// Dense state x action table.
class TabularQ {
 public:
  TabularQ(int state_count, int action_count, double initial_value = 0.0);

  int state_count() const { return state_count_; }
  int action_count() const { return action_count_; }

  std::span<double> row(int state);
  std::span<const double> row(int state) const;
  double value(int state, int action) const;
  double& at(int state, int action);
  double max_value(int state) const;

  const std::vector<double>& data() const { return values_; }

 private:
  int state_count_;
  int action_count_;
  std::vector<double> values_;
};

// Linear action-value function over a Fourier basis: one weight vector per
// action, Q(s,a) = w_a . phi(s).  Scalar selects the storage precision of
// weights and features; all dot products accumulate in double either way.
// float halves the memory footprint and roughly doubles throughput for large
// bases (a five-dimensional order-7 basis has 32768 features per action), at
// ~1e-7 relative weight precision.
template <typename Scalar>
class BasicLinearQ {
 public:
  BasicLinearQ(FourierBasis basis, int action_count);

  const FourierBasis& basis() const { return basis_; }
  int action_count() const { return action_count_; }
  int feature_count() const { return basis_.feature_count(); }

  // Gaussian weight init, mean 0 / given variance, one draw per weight in
  // action-major order.  variance == 0 leaves the weights zero.
  void init_weights_normal(double variance, SplitMix64& rng);

  std::span<Scalar> weights(int action);
  std::span<const Scalar> weights(int action) const;

  double value(std::span<const Scalar> features, int action) const;
  // Writes one value per action.  Sixteen fixed partial sums per action keep
  // the summation order deterministic while breaking the dependency chain
  // that would otherwise serialize the loop.
  void values(std::span<const Scalar> features, std::span<double> out) const;

 private:
  FourierBasis basis_;
  int action_count_;
  std::vector<Scalar> weights_;
};

using LinearQ = BasicLinearQ<double>;
using LinearQF = BasicLinearQ<float>;

}  // namespace ezg
