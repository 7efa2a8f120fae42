#include "pourl/rng.hpp"

#include <bit>
#include <cmath>

namespace pourl {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64_next(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint32_t Rng::uniform_index(std::uint32_t n) {
  return static_cast<std::uint32_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::exponential(double mean) { return -mean * std::log1p(-uniform01()); }

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  splitmix64_next(state);
  return splitmix64_next(state);
}

}  // namespace pourl
