#pragma once

#include <cstdint>

namespace ginet {

/// SplitMix64 (Steele, Lea, Flood 2014). All randomness in the library and the
/// CLI is drawn from this generator so runs are reproducible across platforms;
/// nothing depends on std::random distributions, whose output is
/// implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). Slight modulo bias is irrelevant at our bounds.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  /// Independent stream derived from this seed and a stream label.
  static SplitMix64 derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
    return SplitMix64(mix.next());
  }

 private:
  std::uint64_t state_;
};

}  // namespace ginet
