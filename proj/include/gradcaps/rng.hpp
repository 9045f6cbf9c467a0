#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gradcaps {

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-reproducible regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<__uint128_t>(next_u64()) *
                             static_cast<uint64_t>(n)) >> 64);
  }

  // Standard normal via Box-Muller, one spare cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Named sub-streams derived from one master seed. Keeps concerns (env,
// init, sampling, noise, ...) on independent streams so that toggling one
// consumer does not perturb the others.
enum class Stream : uint64_t {
  Init = 1,
  Env = 2,
  EvalEnv = 3,
  Explore = 4,
  Sampling = 5,
  UpdateNoise = 6,
  Regularizer = 7,
};

inline Rng derive_stream(uint64_t master_seed, Stream stream) {
  return Rng(master_seed * 0x2545f4914f6cdd1dULL + static_cast<uint64_t>(stream));
}

}  // namespace gradcaps
