#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace byzsprt {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Identifies one independent random stream. Streams are derived from the
/// master seed by hashing the key words, never by sharing sequential state,
/// so any (purpose, theta, point, trial, channel) tuple can be opened in any
/// order on any thread and always yields the same draws.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t purpose = 0;  // run kind (plain MC, IS, oracle check, ...)
  std::uint64_t theta = 0;
  std::uint64_t point = 0;    // index into a threshold sweep
  std::uint64_t trial = 0;
  std::uint64_t channel = 0;  // observation / attack / tie / placement / plan
};

/// Per-trial channels. Observations always come from their own channel so
/// two runs that differ only in the attack (or in tie breaks) see identical
/// honest observation sequences under the same seed.
enum class StreamChannel : std::uint64_t {
  kObservation = 1,
  kAttack = 2,
  kTieBreak = 3,
  kPlacement = 4,
  kTiltPlan = 5,
};

/// xoshiro256++ generator seeded through splitmix64 from a StreamKey.
class RandomStream {
 public:
  RandomStream() : RandomStream(StreamKey{}) {}

  explicit RandomStream(const StreamKey& key) {
    std::uint64_t h = key.seed;
    for (std::uint64_t w : {key.purpose, key.theta, key.point, key.trial, key.channel}) {
      h ^= detail::splitmix64(h) + w;
      h = detail::splitmix64(h);
    }
    for (auto& s : state_) s = detail::splitmix64(h);
    // xoshiro must not start at the all-zero state
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the partner value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Fair coin used by the voting tie rule.
  bool coin() { return (next_u64() >> 63) != 0; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // multiply-shift; bias is < 2^-64 * n, irrelevant for simulation use
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Index drawn from the distribution whose cumulative masses are `cdf`
  /// (ascending, last entry ~1). Used for finite-alphabet sampling.
  std::size_t categorical(std::span<const double> cdf) {
    const double u = uniform01();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u < cdf[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  /// Draws a uniformly random k-subset of `pool` (partial Fisher-Yates).
  std::vector<int> sample_without_replacement(std::vector<int> pool, std::size_t k) {
    for (std::size_t i = 0; i < k && i + 1 < pool.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_int(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k < pool.size() ? k : pool.size());
    return pool;
  }

 private:
  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Opens the given channel of a trial-level key.
inline RandomStream open_channel(StreamKey key, StreamChannel channel) {
  key.channel = static_cast<std::uint64_t>(channel);
  return RandomStream(key);
}

}  // namespace byzsprt
