#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mkkm {

/// One step of the splitmix64 generator: advances `state` by the golden
/// gamma and returns the mixed output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Per-repetition seeds: the first `count` outputs of splitmix64 started at
/// `master`.
inline std::vector<std::uint64_t> expand_seeds(std::uint64_t master, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  std::uint64_t state = master;
  for (auto& s : seeds) s = splitmix64(state);
  return seeds;
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mkkm
