#pragma once

#include <cstdint>
#include <string_view>

namespace flightdeck {

// 64-bit FNV-1a. Used for partition assignment so the mapping is stable
// across runs and portable across implementations.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed for a named random stream.
inline uint64_t derive_seed(uint64_t seed, std::string_view stream) {
  uint64_t s = seed ^ fnv1a64(stream);
  return splitmix64(s);
}

}  // namespace flightdeck
