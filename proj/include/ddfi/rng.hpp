#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ddfi {

// All randomness in the library flows through this one generator so that a
// run is reproducible from a single master seed. Algorithm: xoshiro256++
// seeded via splitmix64. Sub-streams (per-epoch, per-node, ...) are derived
// with derive_seed() instead of sharing one stream, so the draw order of one
// component never perturbs another.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable sub-seed derivation: hash of (master, stream, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master ^ (stream * 0xbf58476d1ce4e5b9ULL);
  s ^= index * 0x94d049bb133111ebULL;
  std::uint64_t h = splitmix64_next(s);
  return h ^ splitmix64_next(s);
}

// Named sub-stream tags. Keeping them in one table documents the seed wiring
// of the whole pipeline.
namespace seed_stream {
constexpr std::uint64_t kParamInit = 1;
constexpr std::uint64_t kCllNode = 2;      // index = node id
constexpr std::uint64_t kEdgeDrop = 3;     // index = epoch
constexpr std::uint64_t kGaussianMask = 4; // index = epoch
constexpr std::uint64_t kMaskUniform = 5;
constexpr std::uint64_t kMaskStructural = 6;
constexpr std::uint64_t kSbmEdges = 7;
constexpr std::uint64_t kSbmClassMeans = 8;
constexpr std::uint64_t kSbmNoise = 9;
constexpr std::uint64_t kSbmSplit = 10;
constexpr std::uint64_t kLinkHoldout = 11;
constexpr std::uint64_t kBenchRun = 12; // index = seed slot
} // namespace seed_stream

class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Two uniforms per draw, no cached pair,
  /// so the stream position is a pure function of the call count.
  double normal() {
    const double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

} // namespace ddfi
