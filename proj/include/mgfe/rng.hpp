#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mgfe {

// splitmix64 finalizer: cheap, well-mixed 64-bit hash used to derive
// independent substream seeds from one master seed.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a substream seed from a master seed and one or two integer tags
// (e.g. sample index, shot index).  The derivation is pure, so results are
// independent of evaluation order and scheduling.
inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
  return mix64(master ^ mix64(tag ^ 0x5851f42d4c957f2dULL));
}

inline uint64_t derive_seed(uint64_t master, uint64_t tag_a, uint64_t tag_b) {
  return derive_seed(derive_seed(master, tag_a), tag_b);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

// Uniform double in [0, 1).  Uses the top 53 bits of one engine draw so the
// mapping is fixed by our own code rather than by library internals.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on our own uniform01 (keeps streams
// reproducible across standard library implementations).
inline double standard_normal(std::mt19937_64& rng) {
  double u = 0.0;
  do {
    u = uniform01(rng);
  } while (u <= 0.0);
  const double v = uniform01(rng);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u)) * std::cos(two_pi * v);
}

}  // namespace mgfe
