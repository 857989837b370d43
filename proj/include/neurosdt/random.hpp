#pragma once

// Seeded, splittable random streams.
//
// Generator: xoshiro256** (Blackman & Vigna). State is expanded from a
// (seed, stream) pair with SplitMix64, so Rng(seed, k) for different k are
// independent substreams. Every randomized operation in the library takes an
// explicit seed and derives its substreams by fixed indices, which makes
// results independent of thread count and evaluation order.
//
// Normal deviates use the Marsaglia polar method on 53-bit uniforms. The
// sequence is fully specified here, so outputs are bit-identical for a given
// seed on any IEEE-754 platform with a correctly rounded std::log/std::sqrt.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace neurosdt {

inline constexpr std::uint64_t kDefaultSeed = 42;

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed;
    const std::uint64_t seed_mix = splitmix64(sm);
    std::uint64_t st = stream ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t stream_mix = splitmix64(st);
    std::uint64_t init = seed_mix ^ (stream_mix * 0xA0761D6478BD642FULL);
    for (auto& w : s_) w = splitmix64(init);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Modulo with rejection of the short tail.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % n;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace neurosdt
