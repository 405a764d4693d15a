#pragma once

#include <cstdint>
#include <random>

namespace infrasteer {

// Seeded generator with distributions defined here rather than by the
// standard library, whose distribution algorithms are implementation-defined.
// Runs must be bit-identical across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi], inclusive on both ends.
  int uniform_int(int lo, int hi);

private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer over a pair of words.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace infrasteer
