#include "sentinel/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <cstring>

namespace sentinel {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stage_key(std::uint64_t root_seed, std::string_view stage) noexcept {
  // FNV-1a over the stage name, then mixed with the root seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : stage) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(root_seed) ^ h);
}

Engine make_stream(std::uint64_t root_seed, std::string_view stage, std::uint64_t index) {
  const std::uint64_t key = stage_key(root_seed, stage);
  const std::uint64_t a = splitmix64(key ^ splitmix64(index));
  const std::uint64_t b = splitmix64(a + index);
  std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

int max_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("RISK_SENTINEL_THREADS")) {
    int cap = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, cap);
    if (ec == std::errc() && ptr == end && cap > 0) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

}  // namespace sentinel
