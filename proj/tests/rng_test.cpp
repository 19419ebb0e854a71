#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "patchvote/rng.hpp"

using namespace patchvote;

TEST_CASE("mix64 matches the published splitmix64 outputs") {
  // Successive outputs of the reference generator seeded with 0; each output
  // is the finalizer applied to the pre-incremented state.
  CHECK(mix64(0) == 0xe220a8397b1dcdafull);
  CHECK(mix64(0x9e3779b97f4a7c15ull) == 0x6e789e6aa1b965f4ull);
  CHECK(mix64(0x9e3779b97f4a7c15ull * 2) == 0x06c45d188009454full);
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("draws are a pure function of seed, tag, ordinal, and position") {
  Rng a(42);
  Rng b(42);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() == b.next_u64());

  // Deriving a stream does not consume parent draws.
  Rng c(42);
  Rng d(42);
  (void)c.stream("anything", 7);
  CHECK(c.next_u64() == d.next_u64());

  // Same address, same values; sibling addresses differ.
  CHECK(Rng(1).stream("x", 3).next_u64() == Rng(1).stream("x", 3).next_u64());
  CHECK(Rng(1).stream("x", 3).next_u64() != Rng(1).stream("x", 4).next_u64());
  CHECK(Rng(1).stream("x", 3).next_u64() != Rng(1).stream("y", 3).next_u64());
  CHECK(Rng(1).stream("x").next_u64() != Rng(2).stream("x").next_u64());
}

TEST_CASE("copying an Rng forks the draw sequence") {
  Rng a(9);
  (void)a.next_u64();
  Rng b = a;
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("below stays in range and is roughly uniform") {
  Rng rng(5);
  CHECK(rng.below(1) == 0);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 40000; ++i) {
    uint64_t v = rng.below(4);
    REQUIRE(v < 4);
    counts[v]++;
  }
  for (int c : counts) {
    CHECK(c > 9500);
    CHECK(c < 10500);
  }

  // Non-power-of-two bound exercises the rejection path.
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
}

TEST_CASE("uniform is in [0,1) and uniform(lo,hi) respects the bounds") {
  Rng rng(11);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
  for (int i = 0; i < 1000; ++i) {
    double v = rng.uniform(-2.5, 3.5);
    REQUIRE(v >= -2.5);
    REQUIRE(v < 3.5);
  }
}

TEST_CASE("normal has the requested moments") {
  Rng rng(13);
  const int n = 40000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal(1.5, 2.0);
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(1.5).epsilon(0.03));
  CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("shuffle permutes and hits every order of three elements") {
  Rng rng(17);
  std::vector<int> items{1, 2, 3, 4, 5, 6, 7};
  std::vector<int> shuffled = items;
  rng.shuffle(shuffled);
  std::vector<int> sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == items);

  std::map<std::vector<int>, int> orders;
  for (int i = 0; i < 6000; ++i) {
    std::vector<int> v{0, 1, 2};
    rng.shuffle(v);
    orders[v]++;
  }
  REQUIRE(orders.size() == 6);
  for (const auto& [order, count] : orders) {
    CHECK(count > 800);
    CHECK(count < 1200);
  }
}
