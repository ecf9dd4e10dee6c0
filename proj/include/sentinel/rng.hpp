#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sentinel {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Key for a named stage under a root seed. Stages never share streams.
std::uint64_t stage_key(std::uint64_t root_seed, std::string_view stage) noexcept;

// Independent stream for replicate `index` of `stage`. The stream depends only
// on (root_seed, stage, index), never on thread scheduling.
Engine make_stream(std::uint64_t root_seed, std::string_view stage, std::uint64_t index);

// Uniform on [0,1) with 53 random bits.
inline double uniform01(Engine& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Maximum number of OpenMP threads, capped by RISK_SENTINEL_THREADS when set.
int max_threads();

}  // namespace sentinel
