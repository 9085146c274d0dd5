#pragma once

#include <cstdint>

namespace rmlab {

/// SplitMix64 output for counter value `index` under seed `base`: the
/// finalizer applied to base + (index+1) * golden gamma. SplitMix64 is a
/// counter-based generator, so this is both the stated seed-mixing function
/// for per-trial substreams and a full-period 64-bit stream in its own right.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// xoshiro256++ with the four state words drawn from SplitMix64 on the seed.
/// Substreams for trial i are opened as Rng(mix_seed(base_seed, i)). All
/// floating-point output is derived from the integer stream with fixed
/// arithmetic, so sequences are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double next_unit();

  /// Uniform on [-1, 1).
  double next_symmetric();

  /// Standard normal via Box-Muller; generates pairs and caches the spare.
  double next_normal();

  /// Uniform on {0, 1, ..., bound-1}, unbiased by rejection. bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rmlab
