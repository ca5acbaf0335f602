#ifndef QCOMB_RNG_HPP
#define QCOMB_RNG_HPP

#include <cstdint>
#include <random>

#include "qcomb/numlin.hpp"

namespace qcomb {

// Replication substreams are derived by mixing (master_seed, purpose, index)
// through SplitMix64, so stream i and stream j are decorrelated regardless of
// the execution order or thread schedule. Sampling is inverse-CDF based on
// the quantile functions of numlin, which keeps the generator pinned and the
// sampler consistent with base_quantile by construction.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream purposes (kept distinct so e.g. the Case-III b-vector and the
// per-replication data draws never share a stream).
enum class StreamPurpose : std::uint64_t {
  Covariance = 1,
  Data = 2,
  Beta = 3,
  Subsample = 4,
};

inline std::mt19937_64 make_stream(std::uint64_t master_seed,
                                   StreamPurpose purpose,
                                   std::uint64_t index) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(purpose) * 0xA24BAED4963EE407ULL));
  s = splitmix64(s ^ (index * 0x9FB21C651E98DF25ULL));
  return std::mt19937_64(s);
}

/// Uniform on the open interval (0,1).
inline double uniform_open01(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Inverse-CDF draw from the unit-scale standard form of `d`.
inline double draw(DistributionKind d, std::mt19937_64& g) {
  return base_quantile(d, uniform_open01(g));
}

}  // namespace qcomb

#endif  // QCOMB_RNG_HPP
