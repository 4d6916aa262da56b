#pragma once

#include <cstdint>

namespace owc {

// SplitMix64 finalizer.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based draw: the value depends only on (seed, counter), so parallel
// workers can evaluate any index independently.
inline uint64_t counter_draw(uint64_t seed, uint64_t counter) {
  return mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) + counter * 0x9e3779b97f4a7c15ULL);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(uint64_t seed, uint64_t counter) {
  return static_cast<double>(counter_draw(seed, counter) >> 11) * 0x1.0p-53;
}

}  // namespace owc
