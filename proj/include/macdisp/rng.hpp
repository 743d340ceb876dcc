#pragma once

#include <cstdint>
#include <cmath>
#include <utility>

namespace macdisp {

// Counter-based generator: the stream is a pure function of (seed, stream, counter),
// so per-trial substreams are identical no matter how trials are scheduled.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(mix(seed) ^ (stream + 0x9E3779B97F4A7C15ull))) {}

  std::uint64_t next_u64() {
    return mix(key_ + (++ctr_) * 0x9E3779B97F4A7C15ull);
  }

  // Uniform on [0,1) with 53 random bits.
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform on {0,...,k-1} (multiply-shift with rejection).
  std::uint64_t below(std::uint64_t k) {
    for (;;) {
      const std::uint64_t x = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * k;
      const std::uint64_t lo = static_cast<std::uint64_t>(m);
      if (lo >= k) return static_cast<std::uint64_t>(m >> 64);
      const std::uint64_t floor = (0 - k) % k;
      if (lo >= floor) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // Box-Muller; uniforms mapped into (0,1] so the log never sees zero.
  std::pair<double, double> next_normal_pair() {
    const double u1 = ((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586477 * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace macdisp
