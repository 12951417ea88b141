#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (key, counter): the key is derived from
// (master seed, instance, stream id) and the counter indexes the draw inside
// the stream. Bits come from the SplitMix64 finalizer applied to
// key + counter * 0x9E3779B97F4A7C15. Normal variates use the Box-Muller
// cosine branch on two consecutive 53-bit uniforms. Nothing here depends on
// the standard library's distribution implementations, so outputs are
// identical across platforms with IEEE-754 doubles and a correctly rounded
// log/cos.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pqse {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream identifiers. Changing these values changes every generated
/// dataset.
enum class StreamId : std::uint64_t {
  disorder = 1,
  moments = 2,
  rte_overlap = 3,
  rte_energy = 4,
  rte_energy_sq = 5,
  test = 99,
};

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t master_seed, std::uint64_t instance,
                       StreamId stream) noexcept
      : key_(splitmix64(splitmix64(splitmix64(master_seed) ^ instance) ^
                        static_cast<std::uint64_t>(stream))) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0, 1).
  [[nodiscard]] double uniform_open(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal; consumes counters 2*index and 2*index+1.
  [[nodiscard]] double normal(std::uint64_t index) const noexcept {
    const double u1 = uniform_open(2 * index);
    const double u2 = uniform_open(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace pqse
