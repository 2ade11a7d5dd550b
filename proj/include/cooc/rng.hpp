#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cooc {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of sub-stream `stream` of `seed`. Every stream index gives an independent engine.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return derive_seed(derive_seed(seed, fnv1a(name)), index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return Engine(derive_seed(seed, name, index));
}

}  // namespace cooc
