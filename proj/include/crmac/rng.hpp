#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crmac {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for one named substream of a run. Streams with different names
/// (or salts) are statistically independent, so drawing more values from one
/// never shifts the values drawn from another.
inline Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t salt = 0) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return Rng(splitmix64(seed ^ splitmix64(h ^ splitmix64(salt + 0x5bd1e995ULL))));
}

}  // namespace crmac
