#ifndef RJFIT_RNG_HPP_
#define RJFIT_RNG_HPP_

#include <cstdint>
#include <random>

namespace rjfit {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` of a run seeded with `seed`:
/// splitmix64(seed ^ splitmix64(index)).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

}  // namespace rjfit

#endif  // RJFIT_RNG_HPP_
