#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedcell {

using Rng = std::mt19937_64;

// One step of the SplitMix64 finalizer. Used to derive independent stream
// seeds from a base seed and a tuple of integer keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags so that different consumers of one replica seed never share a
// random stream.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kFading = 2,
  kPartition = 3,
  kInitialization = 4,
  kWeights = 5,
  kDpNoise = 6,
  kShards = 7,
  kDataset = 8,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return Rng(derive_seed(seed, {static_cast<std::uint64_t>(stream)}));
}

}  // namespace fedcell
