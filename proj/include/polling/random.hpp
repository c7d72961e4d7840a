// SPDX-License-Identifier: Apache-2.0
#ifndef POLLING_RANDOM_HPP
#define POLLING_RANDOM_HPP

#include <concepts>
#include <cstdint>
#include <random>

namespace polling {

/// 64-bit engine used by the simulator. mt19937_64 output is fixed by the
/// standard, so a given seed replays identically on every conforming library.
using Engine = std::mt19937_64;

template <class G>
concept Uniform64 = std::uniform_random_bit_generator<G> &&
                    std::same_as<typename G::result_type, std::uint_fast64_t>;

/// SplitMix64 finalizer; used to derive well-separated stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` under `base`. Pure function of both arguments, so
/// replication r always sees the same stream regardless of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform draw in (0, 1]. Uses the top 53 bits, so the mapping from engine
/// output to double does not depend on the standard library implementation
/// (unlike std::uniform_real_distribution).
template <Uniform64 G>
double uniform01(G& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

template <Uniform64 G>
bool bernoulli(G& rng, double p) {
  return uniform01(rng) <= p;
}

/// Binomial(n, p) as a sum of Bernoulli draws; n stays moderate in every
/// use here (queue lengths at polling epochs).
template <Uniform64 G>
long binomial(G& rng, long n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  long hits = 0;
  for (long t = 0; t < n; ++t) hits += bernoulli(rng, p) ? 1 : 0;
  return hits;
}

}  // namespace polling

#endif  // POLLING_RANDOM_HPP
