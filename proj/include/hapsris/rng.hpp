#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hapsris {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent substreams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the substream identified by (seed, tags...). Pure function, so a
/// link or a stage can be evaluated in any order and still draw the same numbers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Rng{derive_seed(seed, tags)};
}

// Stream tags for the scenario stages.
inline constexpr std::uint64_t kStreamUes = 1;
inline constexpr std::uint64_t kStreamLloyd = 2;
inline constexpr std::uint64_t kStreamLinks = 3;

}  // namespace hapsris
