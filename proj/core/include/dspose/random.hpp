#pragma once

#include <cstdint>
#include <random>

namespace dspose {

using Rng = std::mt19937_64;

// Independent, reproducible seed for sub-stream (tag, index) of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, tag, index));
}

// Sub-stream tags.
namespace stream {
inline constexpr std::uint64_t kFigure = 0x46494755;
inline constexpr std::uint64_t kProposal = 0x50524f50;
inline constexpr std::uint64_t kPairing = 0x50414952;
inline constexpr std::uint64_t kInit = 0x494e4954;
inline constexpr std::uint64_t kShuffle = 0x53485546;
inline constexpr std::uint64_t kBackground = 0x424b4744;
}  // namespace stream

}  // namespace dspose
