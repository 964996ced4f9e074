#pragma once

#include <cstdint>

#include "rectnet/matrix.hpp"

namespace rectnet {

// Counter-based 64-bit generator (splitmix64 finalizer). All randomness in
// the library flows through this so results are bit-identical across
// platforms and standard library versions; std:: distributions are avoided
// on purpose because their output is implementation-defined.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform in [-s, s].
  double symmetric(double s) { return uniform(-s, s); }
};

// Stateless hash of the same construction, used to derive independent
// per-index streams from a base seed. Order of use never matters.
inline std::uint64_t splitmix_hash(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline SplitMix64 indexed_stream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(splitmix_hash(seed ^ splitmix_hash(index + 1)));
}

// Deterministic sample point: coordinates of sample `index` in [lo, hi]^dim.
inline Vector sample_box(std::uint64_t seed, std::uint64_t index, std::size_t dim,
                         double lo, double hi) {
  SplitMix64 g = indexed_stream(seed, index);
  Vector x(dim);
  for (std::size_t i = 0; i < dim; ++i) x[i] = g.uniform(lo, hi);
  return x;
}

}  // namespace rectnet
