#ifndef DEGCTRL_RNG_HPP
#define DEGCTRL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace degctrl {

// Deterministic, portable generator. All randomized routines take a seed (or
// a SplitMix64 by value) so runs reproduce bitwise for a fixed root seed.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (no cached spare; keeps the stream
  // position a pure function of the number of draws)
  double normal() {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
};

// Per-task seed derivation from one root seed: task k draws from the stream
// seeded with root xor (k+1)*golden, passed through one SplitMix64 step.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t task) {
  SplitMix64 s(root ^ ((task + 1) * 0x9E3779B97F4A7C15ULL));
  return s.next();
}

}  // namespace degctrl

#endif
