#include "ezgreedy/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ezg {

FourierBasis::FourierBasis(int order, std::vector<std::pair<double, double>> bounds)
    : order_(order), bounds_(std::move(bounds)) {
  if (order_ < 0) throw std::invalid_argument("fourier order must be >= 0");
  if (bounds_.empty()) throw std::invalid_argument("fourier basis needs at least one dimension");
  for (const auto& [lo, hi] : bounds_) {
    if (!(lo < hi)) throw std::invalid_argument("fourier bounds must satisfy lo < hi");
  }

  const int d = dims();
  long long count = 1;
  for (int i = 0; i < d; ++i) {
    count *= order_ + 1;
    if (count > 1'000'000) throw std::invalid_argument("fourier feature count exceeds 1e6");
  }
  feature_count_ = static_cast<int>(count);

  coeffs_.assign(static_cast<size_t>(feature_count_) * d, 0);
  lr_scales_.assign(feature_count_, 1.0);
  std::vector<int> c(d, 0);
  for (int f = 0; f < feature_count_; ++f) {
    double norm_sq = 0.0;
    for (int j = 0; j < d; ++j) {
      coeffs_[static_cast<size_t>(f) * d + j] = c[j];
      norm_sq += static_cast<double>(c[j]) * c[j];
    }
    lr_scales_[f] = norm_sq > 0.0 ? std::sqrt(norm_sq) : 1.0;
    // Odometer increment, last dimension fastest.
    for (int j = d - 1; j >= 0; --j) {
      if (++c[j] <= order_) break;
      c[j] = 0;
    }
  }
}

template <typename Out>
void FourierBasis::features(std::span<const double> obs, std::span<Out> out) const {
  const int d = dims();
  if (static_cast<int>(obs.size()) != d) {
    throw std::invalid_argument("observation dimension mismatch");
  }
  if (static_cast<int>(out.size()) != feature_count_) {
    throw std::invalid_argument("feature output span has wrong size");
  }

  // Unit phasors z_j = exp(i*pi*xbar_j); cos(pi * c . xbar) = Re(prod z_j^{c_j}).
  // The buffers accumulate tensor products over all dimensions but the last,
  // in lexicographic order with the newest dimension fastest; the final
  // dimension then needs only the real part of one more product per feature.
  // Real and imaginary parts live in separate arrays and the products are
  // spelled out (a*c - b*d, a*d + b*c) so the expansion loops vectorize;
  // std::complex would route every multiply through the checked __muldc3
  // helper, which dominated the profile of an earlier version.
  const int levels = order_ + 1;
  // Per-thread scratch keeps the hot path allocation-free while leaving the
  // basis itself immutable (safe to share across trial threads).  The phasor
  // power tables are tiny and stay in double so the recurrence does not lose
  // accuracy; the (much larger) tensor-product buffers run in the output
  // precision, which halves their traffic and doubles vector width when Out
  // is float at a cost of a few float ulps per feature.
  static thread_local std::vector<double> pow_re, pow_im;
  static thread_local std::vector<Out> buf_re, buf_im;
  static thread_local std::vector<Out> next_re, next_im;
  pow_re.assign(static_cast<size_t>(levels) * d, 0.0);
  pow_im.assign(static_cast<size_t>(levels) * d, 0.0);
  for (int j = 0; j < d; ++j) {
    const auto [lo, hi] = bounds_[j];
    const double xbar = (std::clamp(obs[j], lo, hi) - lo) / (hi - lo);
    const double angle = std::numbers::pi * xbar;
    const double zre = std::cos(angle), zim = std::sin(angle);
    double* pre = pow_re.data() + static_cast<size_t>(j) * levels;
    double* pim = pow_im.data() + static_cast<size_t>(j) * levels;
    pre[0] = 1.0;
    pim[0] = 0.0;
    for (int k = 1; k < levels; ++k) {
      pre[k] = pre[k - 1] * zre - pim[k - 1] * zim;
      pim[k] = pre[k - 1] * zim + pim[k - 1] * zre;
    }
  }

  // Dimensions are folded in from the last to the first, each expansion
  // placing the incoming dimension's coefficient as the slowest-varying
  // index.  That ends at exactly the lexicographic order (last dimension
  // fastest) the coefficient table uses, while every inner loop below runs
  // contiguously over the existing partials with the phasor broadcast.
  buf_re.assign(1, Out(1));
  buf_im.assign(1, Out(0));
  for (int j = d - 1; j >= 1; --j) {
    const double* pre = pow_re.data() + static_cast<size_t>(j) * levels;
    const double* pim = pow_im.data() + static_cast<size_t>(j) * levels;
    const size_t count = buf_re.size();
    next_re.resize(count * levels);
    next_im.resize(count * levels);
    for (int k = 0; k < levels; ++k) {
      const Out cre = static_cast<Out>(pre[k]), cim = static_cast<Out>(pim[k]);
      Out* nre = next_re.data() + static_cast<size_t>(k) * count;
      Out* nim = next_im.data() + static_cast<size_t>(k) * count;
      for (size_t p = 0; p < count; ++p) {
        nre[p] = cre * buf_re[p] - cim * buf_im[p];
        nim[p] = cre * buf_im[p] + cim * buf_re[p];
      }
    }
    buf_re.swap(next_re);
    buf_im.swap(next_im);
  }

  const double* pre = pow_re.data();
  const double* pim = pow_im.data();
  const size_t count = buf_re.size();
  // min/max in the output precision: rounding can push |Re| slightly past 1
  // and downstream treats [-1,1] as an invariant.  (std::clamp's
  // reference-returning branches defeat vectorization here.)
  const Out lo = Out(-1), hi = Out(1);
  for (int k = 0; k < levels; ++k) {
    const Out cre = static_cast<Out>(pre[k]), cim = static_cast<Out>(pim[k]);
    Out* ok = out.data() + static_cast<size_t>(k) * count;
    for (size_t p = 0; p < count; ++p) {
      const Out r = cre * buf_re[p] - cim * buf_im[p];
      ok[p] = std::min(hi, std::max(lo, r));
    }
  }
}

template void FourierBasis::features<double>(std::span<const double>, std::span<double>) const;
template void FourierBasis::features<float>(std::span<const double>, std::span<float>) const;

std::vector<double> FourierBasis::features(std::span<const double> obs) const {
  std::vector<double> out(feature_count_);
  features(obs, std::span<double>(out));
  return out;
}

}  // namespace ezg
