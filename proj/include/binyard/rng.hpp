#pragma once

#include <cstdint>
#include <random>

namespace binyard {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent stream seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for sub-stream `stream` of `master`. Distinct streams give unrelated generators.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Named sub-streams so that different consumers of one master seed never collide.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kPolicySampling = 2;
inline constexpr std::uint64_t kEnvEpisodes = 3;
inline constexpr std::uint64_t kMinibatch = 4;
inline constexpr std::uint64_t kEvalRollouts = 5;
inline constexpr std::uint64_t kPhase = 6;
}  // namespace streams

}  // namespace binyard
