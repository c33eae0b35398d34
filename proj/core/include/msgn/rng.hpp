#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace msgn::rng {

// 64-bit finalizer with full avalanche (Stafford's Mix13). Keys that
// differ in a single bit produce statistically unrelated outputs, which
// is what makes the per-cell keyed construction usable as a random field.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t combine(uint64_t a, uint64_t b) {
  return mix64(a + 0x9e3779b97f4a7c15ULL * (b + 1));
}

// Deterministic stream of draws derived from a single 64-bit key
// (splitmix64 sequence). One instance per PRM cell / SDE driver; the
// sequence consumed inside a cell never leaks into any other cell.
class KeyedStream {
 public:
  explicit KeyedStream(uint64_t key) : state_(mix64(key ^ 0xd1b54a32d192ed03ULL)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on (0, 1]; never returns 0, so positions land strictly
  // inside half-open cells.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit_open();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Exact Poisson sampling: Knuth's product method below mean 10,
  // Hormann's transformed rejection (PTRD) above. Both draw from the
  // true distribution, so downstream goodness-of-fit tests see no
  // sampler bias.
  long long next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      long long k = 0;
      double prod = next_unit_open();
      while (prod > limit) {
        ++k;
        prod *= next_unit_open();
      }
      return k;
    }
    // PTRD (Hormann 1993). Constants as published.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      double u = next_unit() - 0.5;
      double v = next_unit_open();
      double us = 0.5 - std::abs(u);
      double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      double k = kf;
      double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      double rhs = k * log_mean - mean - std::lgamma(k + 1.0);
      if (lhs <= rhs) return static_cast<long long>(kf);
    }
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Key for one (strip, time-window) cell of one Poisson random measure
// realization. Everything the cell's points depend on goes in here.
inline uint64_t cell_key(uint64_t seed, uint32_t replica, uint64_t reaction_hash,
                         uint32_t strip, int64_t window) {
  uint64_t k = combine(seed, 0x7072'6d63'656c'6cULL);  // domain separator
  k = combine(k, replica);
  k = combine(k, reaction_hash);
  k = combine(k, (static_cast<uint64_t>(strip) << 48) ^ static_cast<uint64_t>(window));
  return k;
}

}  // namespace msgn::rng
