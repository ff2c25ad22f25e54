#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace grassroots {

/// Random stream used by every stochastic operation.
///
/// std::mt19937_64 is bit-specified by the standard, but the standard
/// distributions are not, so the helpers below derive doubles, bounded
/// integers and shuffles directly from raw 64-bit output. Results are
/// therefore identical across standard library implementations.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, bound), bound > 0. Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

/// Fisher-Yates shuffle built on uniform_index.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Folds one more word into a running hash.
constexpr std::uint64_t combine_seed(std::uint64_t h, std::uint64_t word) {
  return mix64(h ^ mix64(word + 0x632BE59BD9B4E019ULL));
}

}  // namespace grassroots
