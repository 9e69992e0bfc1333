#pragma once

#include <cstdint>
#include <random>

namespace hfvp {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent substream seed for (seed, stream, index). Used so every
/// pipeline stage and every horizon candidate owns its own generator.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

namespace stream {
inline constexpr std::uint64_t kZenith = 0x7a656e;
inline constexpr std::uint64_t kSampling = 0x73616d;
inline constexpr std::uint64_t kCandidate = 0x63616e;
inline constexpr std::uint64_t kPriorFit = 0x666974;
}  // namespace stream

}  // namespace hfvp
