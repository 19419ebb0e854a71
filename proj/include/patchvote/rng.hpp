#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace patchvote {

// splitmix64 finalizer; bijective on uint64.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Counter-based, splittable generator. Every draw is a pure function of
// (root seed, stream tag, ordinal, draw counter), so a consumer can hand out
// independent streams to sub-tasks and the values never depend on evaluation
// order or thread count. Copying an Rng forks the draw counter.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0x5bf0f3b4c9d1e2a7ull)) {}

  // Child stream addressed by (tag, ordinal); derivation is order-free.
  Rng stream(std::string_view tag, uint64_t ordinal = 0) const {
    Rng child = *this;
    child.state_ = mix64(mix64(state_ ^ fnv1a64(tag)) + ordinal);
    child.counter_ = 0;
    return child;
  }

  uint64_t next_u64() {
    return mix64(state_ + 0x9e3779b97f4a7c15ull * ++counter_);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n); n must be positive. Lemire's multiply-shift
  // rejection keeps the distribution exact.
  uint64_t below(uint64_t n);

  // Mean/stddev gaussian via Box-Muller (two uniforms per call, no caching,
  // so the draw count stays a pure function of the call count).
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace patchvote
