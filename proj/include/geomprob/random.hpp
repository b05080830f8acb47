#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (key, counter):
//
//   draw_k = avalanche(key + k * 0x9E3779B97F4A7C15),  k = 1, 2, ...
//
// where avalanche is the SplitMix64 finalizer
//
//   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//   z ^= z >> 27; z *= 0x94D049BB133111EB;
//   z ^= z >> 31;
//
// Substream i of a seed s has key mix(s, i) = avalanche(s + (i + 1) * golden).
// The avalanche is a bijection of 64-bit words and i -> s + (i+1)*golden is
// injective because golden is odd, so mix is injective in i.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace geomprob {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t avalanche(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t mix(std::uint64_t value, std::uint64_t i) {
  return avalanche(value + (i + 1) * kGolden);
}

struct Seed {
  std::uint64_t value = 0;

  constexpr Seed substream(std::uint64_t i) const { return Seed{mix(value, i)}; }
  friend constexpr bool operator==(Seed, Seed) = default;
};

class SampleStream {
 public:
  constexpr explicit SampleStream(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}
  constexpr explicit SampleStream(Seed s) : SampleStream(s.value) {}

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

  constexpr std::uint64_t next_u64() { return avalanche(key_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  /// Two independent standard normals (Box-Muller, always two uniforms).
  void normal_pair(double& a, double& b) {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    a = r * std::cos(theta);
    b = r * std::sin(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace geomprob
