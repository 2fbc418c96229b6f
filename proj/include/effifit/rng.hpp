#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace effifit {

/// SplitMix64 output function (stateless finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for the index-th substream of a master seed. Substreams are the
/// SplitMix64 sequence evaluated at distinct positions, so they can be
/// consumed in any order (per-point, per-trial) without coupling.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

struct GaussPair {
  double z0;
  double z1;
};

/// Small counter-style generator (SplitMix64). Bit-reproducible across
/// platforms and thread counts; owns no global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  /// Uniform double in (0, 1].
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Independent standard normal pair (Box-Muller).
  GaussPair next_gaussian_pair() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double next_gaussian() { return next_gaussian_pair().z0; }

 private:
  std::uint64_t state_;
};

}  // namespace effifit
