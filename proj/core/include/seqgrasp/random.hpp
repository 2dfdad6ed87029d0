#pragma once

#include <cmath>
#include <cstdint>

namespace seqgrasp {

/// Deterministic RNG stream. Wraps splitmix64 for stream derivation and a
/// xoshiro256++ core with explicit Box-Muller normals so that results are
/// identical across platforms and standard-library versions.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) { reseed(seed); }

  /// Derives an independent child stream, e.g. per synthesis candidate.
  static RandomStream derive(std::uint64_t seed, std::uint64_t stream_id) {
    return RandomStream(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1))));
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x = splitmix64_step(x);
      word = x;
    }
    have_spare_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller with one cached spare.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  static std::uint64_t splitmix64(std::uint64_t x) { return splitmix64_step(x); }

 private:
  static std::uint64_t splitmix64_step(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t splitmix64_step(std::uint64_t&& x) {
    std::uint64_t y = x;
    return splitmix64_step(y);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace seqgrasp
