#ifndef SAIS_RANDOM_HPP
#define SAIS_RANDOM_HPP

#include <cstdint>
#include <random>

namespace sais {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one (arm, replication) stream. Pure function of its inputs; distinct
/// arms and replications never share a stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t arm,
                                 std::uint64_t replication) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ (arm + 1)) ^ (replication + 0x5851f42d4c957f2dULL));
}

}  // namespace sais

#endif  // SAIS_RANDOM_HPP
