#pragma once

#include <span>
#include <utility>
#include <vector>

namespace ezg {

// Full Fourier basis over [0,1]^dims: one feature cos(pi * c . xbar) per
// coefficient vector c in {0..order}^dims (lexicographic, last dimension
// fastest), where xbar is the observation clipped to the given bounds and
// rescaled to [0,1].  Per-feature learning-rate scales are ||c||_2 with 1 for
// the constant feature.
class FourierBasis {
 public:
  FourierBasis(int order, std::vector<std::pair<double, double>> bounds);

  int order() const { return order_; }
  int dims() const { return static_cast<int>(bounds_.size()); }
  int feature_count() const { return feature_count_; }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }
  const std::vector<double>& lr_scales() const { return lr_scales_; }
  // Coefficient vector of feature i (row-major into a dims-wide table).
  const std::vector<int>& coefficients() const { return coeffs_; }

  // Writes feature_count() values into out.  Evaluates all cosines through
  // products of per-dimension complex exponentials, so cost is one pass over
  // the feature tensor instead of feature_count() cosine calls.  The
  // per-dimension phasors are computed in double; the tensor expansion runs
  // in Out precision (a few float ulps of error when Out is float).
  template <typename Out>
  void features(std::span<const double> obs, std::span<Out> out) const;
  std::vector<double> features(std::span<const double> obs) const;

 private:
  int order_;
  std::vector<std::pair<double, double>> bounds_;
  int feature_count_;
  std::vector<int> coeffs_;  // feature_count * dims, lexicographic
  std::vector<double> lr_scales_;
};

}  // namespace ezg
