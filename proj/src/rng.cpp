#include "patchvote/rng.hpp"

#include <cmath>
#include <numbers>

namespace patchvote {

uint64_t Rng::below(uint64_t n) {
  if (n == 0) return 0;
  while (true) {
    uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t lo = static_cast<uint64_t>(m);
    if (lo >= n || lo >= (-n) % n) return static_cast<uint64_t>(m >> 64);
  }
}

double Rng::normal(double mean, double stddev) {
  double u1 = uniform();
  double u2 = uniform();
  // Guard against log(0); uniform() can return exactly 0.
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace patchvote
