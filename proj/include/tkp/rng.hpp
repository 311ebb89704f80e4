#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tkp {

// All sampling uses std::mt19937_64 whose output sequence is fixed by the
// standard, so identical seeds reproduce identical results on any platform.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for shard (batch, round, ...) k of a run with the given base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t shard) {
  return base ^ splitmix64(shard);
}

/// Uniform double in [0, 1) from the generator's top 53 bits.
inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a finite distribution (probabilities sum to ~1).
inline std::size_t sample_index(const std::vector<double>& probabilities,
                                std::mt19937_64& gen) {
  const double u = uniform_unit(gen);
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return probabilities.empty() ? 0 : probabilities.size() - 1;
}

}  // namespace tkp
