#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ellipt {

// Counter-style stream derivation: every random draw in the toolkit comes
// from a stream keyed by (seed, indices...), so results do not depend on the
// order in which rows, trees, pairs or trials are processed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

using Stream = std::mt19937_64;

inline Stream make_stream(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> keys = {}) {
  return Stream(derive_seed(seed, keys));
}

// Namespaces for derived streams, so two modules fed the same master seed
// never share draws.
namespace streams {
inline constexpr std::uint64_t kForest = 0x100;
inline constexpr std::uint64_t kImportance = 0x101;
inline constexpr std::uint64_t kTransform = 0x200;
inline constexpr std::uint64_t kLocus = 0x201;
inline constexpr std::uint64_t kObjective = 0x202;
inline constexpr std::uint64_t kAttack = 0x300;
inline constexpr std::uint64_t kTune = 0x400;
inline constexpr std::uint64_t kVerify = 0x401;
}  // namespace streams

}  // namespace ellipt
