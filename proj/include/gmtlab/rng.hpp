#pragma once

#include <cstdint>
#include <random>

namespace gmtlab {

/// splitmix64 finalizer; mixes a 64-bit counter into a well-distributed seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generator for stream `index` of a run seeded with `seed`.
/// Streams depend only on (seed, index), never on scheduling order.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

/// Uniform double in [0, 1) with 53 random bits. Used instead of
/// std::uniform_real_distribution so results do not depend on the standard
/// library implementation.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace gmtlab
