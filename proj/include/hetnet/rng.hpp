#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hetnet {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent engine keyed on (seed, index). The key is a pure function of
/// its inputs, so trial i sees the same stream whichever worker runs it.
inline Engine substream(std::uint64_t seed, std::uint64_t index) {
  return Engine(splitmix64(splitmix64(seed) ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL)));
}

/// Uniform on [0, 1). 64-bit engines use the top 53 bits directly, which is
/// about twice as fast as std::generate_canonical in libstdc++.
template <class URBG>
double uniform01(URBG& rng) {
  if constexpr (URBG::min() == 0 && URBG::max() == ~std::uint64_t{0}) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  } else {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
}

/// Unit-mean exponential.
template <class URBG>
double exponential1(URBG& rng) {
  return -std::log1p(-uniform01(rng));
}

}  // namespace hetnet
