#ifndef AMCTS_RNG_HPP
#define AMCTS_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace amcts {

// Deterministic stream derivation: one global seed fans out into independent
// substreams addressed by a tag path (component id, repetition, agent, ...).
// All draws below avoid std::uniform_*_distribution so that byte-identical
// reproducibility does not depend on the standard library implementation.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = base;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t tag : path) {
    s = out ^ (tag + 0x9E3779B97F4A7C15ULL);
    out = splitmix64(s);
  }
  return out;
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(derive_seed(base, path));
}

// Uniform in [0, n). Bias is < 2^-53 for the n used here; multiply-shift keeps
// the mapping platform independent.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n)) >> 64);
}

// Uniform in [lo, hi) with 53 random bits.
inline double uniform_double(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline bool bernoulli(std::mt19937_64& rng, double p) {
  return uniform_double(rng, 0.0, 1.0) < p;
}

// k distinct values from {0, ..., n-1}, partial Fisher-Yates, ascending result order
// is not guaranteed.
inline std::vector<int> sample_without_replacement(std::mt19937_64& rng, int n, int k) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k && i < n; ++i) {
    const auto j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace amcts

#endif  // AMCTS_RNG_HPP
