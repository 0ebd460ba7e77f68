#pragma once

#include <cstdint>
#include <random>

namespace hopfinf {

/// Uniform double in [0, 1) with the same bits on every standard library.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

}  // namespace hopfinf
