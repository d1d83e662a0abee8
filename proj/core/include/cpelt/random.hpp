#pragma once

#include <cstdint>
#include <random>

namespace cpelt {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for replicate `index`: seed ⊕ splitmix64(index).
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) { return Rng(seed ^ splitmix64(index)); }

}  // namespace cpelt
