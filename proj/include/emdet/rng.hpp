#ifndef EMDET_RNG_HPP_
#define EMDET_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace emdet {

// splitmix64; used to derive independent per-purpose seeds from one root seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return mix_seed(root ^ h);
}

using Rng = std::mt19937_64;

}  // namespace emdet

#endif
