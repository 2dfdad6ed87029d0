#pragma once

#include <cstdint>
#include <string_view>

namespace seqgrasp {

/// FNV-1a 64-bit, used to fingerprint model files and datasets.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace seqgrasp
