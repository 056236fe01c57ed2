#pragma once

#include <cstdint>

namespace riobs {

// splitmix64 generator. std::uniform_real_distribution is implementation
// defined, which would break byte-identical outputs across toolchains, so
// the few distributions needed are written out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for (seed, stream) pairs; streams are decorrelated by
  // hashing the stream id through one splitmix round before mixing.
  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool coin() { return (next_u64() >> 63) != 0; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace riobs
