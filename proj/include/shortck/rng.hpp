#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace shortck {

// SplitMix64. Every Monte Carlo sample derives its own stream from
// (seed, sample index), so results do not depend on evaluation order or on
// how work is split across threads.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}

  static Rng for_sample(uint64_t seed, uint64_t index) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    r.next();
    r.next();
    return r;
  }

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on the open disc of the given radius (area measure).
  std::complex<double> disc(double radius) {
    double r = radius * std::sqrt(uniform());
    double th = 6.283185307179586477 * uniform();
    return {r * std::cos(th), r * std::sin(th)};
  }

  std::complex<double> unit_circle() {
    double th = 6.283185307179586477 * uniform();
    return {std::cos(th), std::sin(th)};
  }

  uint64_t below(uint64_t n) { return next() % n; }
};

}  // namespace shortck
