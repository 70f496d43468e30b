#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace costat {

// 64-bit finalizer with full avalanche (splitmix64 style).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Keeps random streams from different subsystems apart even when the user
// passes the same seed everywhere.
inline constexpr std::uint64_t salt_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ (tag * 0x9e3779b97f4a7c15ULL));
}

inline constexpr std::uint64_t kMomentStreamTag = 1;
inline constexpr std::uint64_t kSimStreamTag = 2;
inline constexpr std::uint64_t kFdrStreamTag = 3;

// Deterministic per-stream generator. A stream is identified by (seed,
// stream index); callers assign one stream per independent unit of work
// (replicate, gene row, label permutation), so output never depends on how
// the units are split across workers.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1))),
        gamma_(mix64(stream ^ mix64(seed ^ 0xda3e39cb94b95bdbULL)) | 1ULL) {}

  std::uint64_t next_u64() {
    state_ += gamma_;
    return mix64(state_);
  }

  // Uniform on (0, 1]; never returns 0 so it is safe inside a log().
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached, so draws stay deterministic per stream.
  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound), bias-free by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Fisher-Yates shuffle driven by a StreamRng.
template <typename T>
void shuffle(std::vector<T>& v, StreamRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.next_below(i)]);
  }
}

}  // namespace costat
