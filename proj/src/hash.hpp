#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace buzz {

// FNV-1a, 64 bit. Stable across platforms; used for match ids and dataset
// fingerprints so reruns over identical inputs produce identical artifacts.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace buzz
