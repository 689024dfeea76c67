#include "ezgreedy/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ezg {

TabularQ::TabularQ(int state_count, int action_count, double initial_value)
    : state_count_(state_count), action_count_(action_count) {
  if (state_count <= 0 || action_count <= 0) {
    throw std::invalid_argument("table dimensions must be positive");
  }
  values_.assign(static_cast<size_t>(state_count) * action_count, initial_value);
}

std::span<double> TabularQ::row(int state) {
  if (state < 0 || state >= state_count_) throw std::out_of_range("state out of range");
  return {values_.data() + static_cast<size_t>(state) * action_count_,
          static_cast<size_t>(action_count_)};
}

std::span<const double> TabularQ::row(int state) const {
  if (state < 0 || state >= state_count_) throw std::out_of_range("state out of range");
  return {values_.data() + static_cast<size_t>(state) * action_count_,
          static_cast<size_t>(action_count_)};
}

double TabularQ::value(int state, int action) const {
  auto r = row(state);
  if (action < 0 || action >= action_count_) throw std::out_of_range("action out of range");
  return r[action];
}

double& TabularQ::at(int state, int action) {
  auto r = row(state);
  if (action < 0 || action >= action_count_) throw std::out_of_range("action out of range");
  return r[action];
}

double TabularQ::max_value(int state) const {
  auto r = row(state);
  return *std::max_element(r.begin(), r.end());
}

template <typename Scalar>
BasicLinearQ<Scalar>::BasicLinearQ(FourierBasis basis, int action_count)
    : basis_(std::move(basis)), action_count_(action_count) {
  if (action_count <= 0) throw std::invalid_argument("action count must be positive");
  weights_.assign(static_cast<size_t>(basis_.feature_count()) * action_count, Scalar{0});
}

template <typename Scalar>
void BasicLinearQ<Scalar>::init_weights_normal(double variance, SplitMix64& rng) {
  if (variance < 0.0) throw std::invalid_argument("variance must be >= 0");
  if (variance == 0.0) {
    std::fill(weights_.begin(), weights_.end(), Scalar{0});
    return;
  }
  const double sd = std::sqrt(variance);
  for (Scalar& w : weights_) w = static_cast<Scalar>(sd * rng.next_normal());
}

template <typename Scalar>
std::span<Scalar> BasicLinearQ<Scalar>::weights(int action) {
  if (action < 0 || action >= action_count_) throw std::out_of_range("action out of range");
  return {weights_.data() + static_cast<size_t>(action) * basis_.feature_count(),
          static_cast<size_t>(basis_.feature_count())};
}

template <typename Scalar>
std::span<const Scalar> BasicLinearQ<Scalar>::weights(int action) const {
  if (action < 0 || action >= action_count_) throw std::out_of_range("action out of range");
  return {weights_.data() + static_cast<size_t>(action) * basis_.feature_count(),
          static_cast<size_t>(basis_.feature_count())};
}

template <typename Scalar>
double BasicLinearQ<Scalar>::value(std::span<const Scalar> features, int action) const {
  auto w = weights(action);
  if (features.size() != w.size()) throw std::invalid_argument("feature size mismatch");
  const size_t n = w.size();
  const size_t head = n / 4 * 4;
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  for (size_t i = 0; i < head; i += 4) {
    acc0 += static_cast<double>(w[i]) * features[i];
    acc1 += static_cast<double>(w[i + 1]) * features[i + 1];
    acc2 += static_cast<double>(w[i + 2]) * features[i + 2];
    acc3 += static_cast<double>(w[i + 3]) * features[i + 3];
  }
  for (size_t i = head; i < n; ++i) acc0 += static_cast<double>(w[i]) * features[i];
  return (acc0 + acc1) + (acc2 + acc3);
}

template <typename Scalar>
void BasicLinearQ<Scalar>::values(std::span<const Scalar> features, std::span<double> out) const {
  if (static_cast<int>(out.size()) != action_count_) {
    throw std::invalid_argument("output span must have one slot per action");
  }
  if (static_cast<int>(features.size()) != basis_.feature_count()) {
    throw std::invalid_argument("feature size mismatch");
  }
  const size_t n = features.size();
  const size_t head = n / 16 * 16;
  for (int a = 0; a < action_count_; ++a) {
    const Scalar* w = weights_.data() + static_cast<size_t>(a) * n;
    // Accumulating in Scalar keeps the lanes vectorizable without widening
    // conversions; sixteen float partial sums over [-1,1] features stay well
    // within float range, and the lane reduction happens in double.
    Scalar acc[16] = {};
    for (size_t i = 0; i < head; i += 16) {
      for (size_t k = 0; k < 16; ++k) {
        acc[k] += w[i + k] * features[i + k];
      }
    }
    for (size_t i = head; i < n; ++i) acc[0] += w[i] * features[i];
    double total = 0.0;
    for (Scalar part : acc) total += static_cast<double>(part);
    out[a] = total;
  }
}

template class BasicLinearQ<double>;
template class BasicLinearQ<float>;

}  // namespace ezg
