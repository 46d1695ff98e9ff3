#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace nfisac {

/// Counter-based stream: output i is the SplitMix64 finalizer of key + i*phi.
/// Streams are keyed by (seed, range bin, purpose), so bins can be generated
/// in any order or in parallel with identical results.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t k = 0x6a09e667f3bcc909ULL;
    for (auto p : parts) k = mix(k ^ mix(p + 0x9e3779b97f4a7c15ULL));
    key_ = k;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL); }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
};

// Ziggurat sampler; several times faster than std::normal_distribution here.
using NormalDistribution = boost::random::normal_distribution<double>;

}  // namespace nfisac
