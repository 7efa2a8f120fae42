#pragma once

#include <array>
#include <cstdint>

namespace pourl {

// Advances a splitmix64 state and returns the next output word.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Deterministic PRNG used everywhere the system needs randomness:
// xoshiro256++ seeded through splitmix64. Hand-rolled because simulation
// results must be bit-reproducible across platforms and standard library
// versions, and std::mt19937's distribution functions are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), using the top 53 bits of one output word.
  double uniform01();

  // Uniform integer in [0, n) for n >= 1, via 128-bit multiply bounding.
  std::uint32_t uniform_index(std::uint32_t n);

  // Exponential with the given mean, by inverting the CDF on uniform01().
  double exponential(double mean);

  // Deterministically derives an independent child seed from (seed, stream).
  // Gives every node, agent, and simulation phase its own stream while the
  // whole run stays a function of one master seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace pourl
