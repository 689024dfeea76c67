#pragma once

#include <cmath>
#include <cstdint>

namespace ezg {

// SplitMix64 (Steele, Lea & Flood 2014).  One 64-bit word of state and a
// finalizer-style output mix.  Chosen because seeding is O(1) and arbitrary
// (seed, index) pairs can be mixed into decorrelated streams, which is what
// the per-trial parallelism relies on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., bound-1}, unbiased (Lemire's multiply-shift with
  // rejection on the low word).
  std::uint64_t next_below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; uses two uniforms per draw so the
  // generator state advances by a fixed amount regardless of the value.
  double next_normal() {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic stream derivation: runs the SplitMix64 finalizer over the
// (seed, stream) pair.  Streams for distinct indices are decorrelated even
// for adjacent seeds, so trial results do not depend on scheduling order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

// Two-level variant: one stream per (trial, purpose) pair, e.g. separate
// environment, policy, and initialization streams inside a trial.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t purpose) {
  return stream_seed(stream_seed(seed, trial), purpose);
}

}  // namespace ezg
