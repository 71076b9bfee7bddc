#pragma once

#include <cstdint>

namespace prefix_dse {

// splitmix64 finalizer
constexpr std::uint64_t hash_mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-node term of the order-independent structural hash. `split` is the lsb
/// of the trivial fan-in.
constexpr std::uint64_t node_hash(int msb, int lsb, int split) noexcept {
  return hash_mix((static_cast<std::uint64_t>(msb) << 40) |
                  (static_cast<std::uint64_t>(lsb) << 20) | static_cast<std::uint64_t>(split));
}

}  // namespace prefix_dse
