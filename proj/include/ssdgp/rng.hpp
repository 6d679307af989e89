#pragma once

// Counter-based random streams. Every (seed, stream, substream) triple maps to an
// independent generator, so parallel loops draw the same numbers regardless of
// how iterations are scheduled.

#include <cstdint>
#include <limits>

namespace ssdgp {

/// SplitMix64 engine; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  std::uint64_t s = mix();
  SplitMix64 mix2(s ^ (0x8CB92BA72F3D8DD7ULL * (substream + 1)));
  return mix2();
}

}  // namespace ssdgp
