#pragma once

#include <cstdint>
#include <random>

namespace curesurv {

using Rng = std::mt19937_64;

/// Independent stream `stream` derived from `master` (SplitMix64 mixing), so
/// a replicate can be reproduced without running the ones before it.
Rng make_stream(std::uint64_t master, std::uint64_t stream);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace curesurv
