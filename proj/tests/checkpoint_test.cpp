#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "patchvote/checkpoint.hpp"
#include "test_util.hpp"

using namespace patchvote;
using testutil::slurp;

namespace {

struct TempDir : testutil::TempDir {
  TempDir() : testutil::TempDir("ckpt") {}
};

void dump(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

SmallCnn<float> sample_net() { return SmallCnn<float>(3, 16, 42, {2, 3, 4}); }

const std::vector<std::string> kLabels{"alpha", "beta", "gamma"};

}  // namespace

TEST_CASE("checkpoints survive a save/load round trip bit for bit") {
  TempDir tmp;
  SmallCnn<float> net = sample_net();
  CheckpointMeta meta;
  meta.grid = GridSpec{6, 8};
  meta.augment = AugmentKind::kTdli;
  std::string path = tmp.file("model.pvw");
  save_checkpoint(net, kLabels, meta, path);

  LoadedCheckpoint back = load_checkpoint(path);
  CHECK(back.labels == kLabels);
  CHECK(back.net.num_classes() == 3);
  CHECK(back.net.input_size() == 16);
  CHECK(back.net.conv_widths() == std::array<int, 3>{2, 3, 4});
  REQUIRE(back.net.parameter_count() == net.parameter_count());
  CHECK(std::memcmp(back.net.parameters().data(), net.parameters().data(),
                    net.parameter_count() * sizeof(float)) == 0);
  REQUIRE(back.meta.grid.has_value());
  CHECK(*back.meta.grid == GridSpec{6, 8});
  REQUIRE(back.meta.augment.has_value());
  CHECK(*back.meta.augment == AugmentKind::kTdli);
}

TEST_CASE("metadata is optional") {
  TempDir tmp;
  std::string path = tmp.file("bare.pvw");
  save_checkpoint(sample_net(), kLabels, CheckpointMeta{}, path);
  LoadedCheckpoint back = load_checkpoint(path);
  CHECK_FALSE(back.meta.grid.has_value());
  CHECK_FALSE(back.meta.augment.has_value());
}

TEST_CASE("saving is byte reproducible") {
  TempDir tmp;
  SmallCnn<float> net = sample_net();
  CheckpointMeta meta;
  meta.grid = GridSpec{2, 2};
  save_checkpoint(net, kLabels, meta, tmp.file("a.pvw"));
  save_checkpoint(net, kLabels, meta, tmp.file("b.pvw"));
  CHECK(slurp(tmp.file("a.pvw")) == slurp(tmp.file("b.pvw")));
}

TEST_CASE("label count must match the class count") {
  TempDir tmp;
  std::vector<std::string> two{"a", "b"};
  CHECK_THROWS_AS(
      save_checkpoint(sample_net(), two, CheckpointMeta{}, tmp.file("x.pvw")),
      std::invalid_argument);
}

TEST_CASE("corrupt checkpoints are rejected with the path in the message") {
  TempDir tmp;
  std::string good = tmp.file("good.pvw");
  save_checkpoint(sample_net(), kLabels, CheckpointMeta{}, good);
  std::vector<char> bytes = slurp(good);

  SUBCASE("bad magic") {
    std::vector<char> bad = bytes;
    bad[0] = 'X';
    std::string path = tmp.file("magic.pvw");
    dump(path, bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"),
                         std::runtime_error);
    CHECK_THROWS_WITH(load_checkpoint(path), doctest::Contains("magic.pvw"));
  }

  SUBCASE("unsupported version") {
    std::vector<char> bad = bytes;
    bad[4] = 99;  // u32 little-endian version field follows the magic
    bad[5] = bad[6] = bad[7] = 0;
    std::string path = tmp.file("version.pvw");
    dump(path, bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("unsupported version 99"),
                         std::runtime_error);
  }

  SUBCASE("truncation") {
    std::vector<char> bad(bytes.begin(),
                          bytes.begin() + std::ptrdiff_t(bytes.size() / 2));
    std::string path = tmp.file("short.pvw");
    dump(path, bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("unexpected end of file"),
                         std::runtime_error);
  }

  SUBCASE("renamed weight array") {
    // Same-length rename keeps every offset valid, so the loader must notice
    // the missing tensor rather than crash.
    std::vector<char> bad = bytes;
    const char needle[] = "conv1.weight";
    auto it = std::search(bad.begin(), bad.end(), needle, needle + 12);
    REQUIRE(it != bad.end());
    *(it + 11) = 'x';
    std::string path = tmp.file("renamed.pvw");
    dump(path, bad);
    CHECK_THROWS_WITH_AS(load_checkpoint(path),
                         doctest::Contains("missing conv1.weight"),
                         std::runtime_error);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.file("absent.pvw")),
                         doctest::Contains("absent.pvw"), std::runtime_error);
  }
}
