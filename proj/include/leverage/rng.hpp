#pragma once

#include <cstdint>

namespace leverage {

/// SplitMix64 (Steele, Lea, Flood 2014), stream version 1.
///
/// Output is fully specified by the 64-bit seed, independent of platform and standard library,
/// which keeps simulation traces bit-for-bit reproducible. split() derives an independent child
/// stream from the next output.
class SplitMix64 {
 public:
  static constexpr int kVersion = 1;
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  SplitMix64 split() noexcept { return SplitMix64((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace leverage
