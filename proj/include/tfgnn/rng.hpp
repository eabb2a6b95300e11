#pragma once

#include <cstdint>
#include <random>

namespace tfgnn {

// Seeded random source whose output is identical on every platform.
//
// The engine is std::mt19937_64, whose sequence is fixed by the standard.
// The standard distributions are not, so bounded integers, uniforms and
// normals are derived here from raw 64-bit draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal (Box-Muller, pairs cached).
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Mixes a base seed with a stream index into an independent seed
// (splitmix64 finaliser). Used to give each walk or run its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tfgnn
