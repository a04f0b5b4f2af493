#pragma once

#include <cstdint>
#include <limits>

namespace fungibility {

/// SplitMix64 (Steele, Lea, Flood 2014). Small, fast and fully specified, so
/// sampled streams are identical on every platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Seed of the independent stream number `index` under a master seed.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  SplitMix64 mix(seed ^ (index * 0xd1b54a32d192ed03ULL));
  mix();
  return mix();
}

}  // namespace fungibility
