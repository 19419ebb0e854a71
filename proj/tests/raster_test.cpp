#include <doctest.h>

#include <stdexcept>

#include "patchvote/augment.hpp"
#include "patchvote/raster.hpp"
#include "patchvote/rng.hpp"

using namespace patchvote;

namespace {

Raster random_raster(int w, int h, Rng& rng) {
  Raster r(w, h);
  for (uint8_t& b : r.pixels) b = uint8_t(rng.below(256));
  return r;
}

}  // namespace

TEST_CASE("parse_grid reads RxC and rejects malformed text") {
  GridSpec g = parse_grid("6x8");
  CHECK(g.rows == 6);
  CHECK(g.cols == 8);
  CHECK(parse_grid("1X1") == GridSpec{1, 1});
  CHECK(grid_to_string({6, 8}) == "6x8");
  CHECK_THROWS_AS(parse_grid("6"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0x8"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("6x-8"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("axb"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("6x8x2"), std::invalid_argument);
}

TEST_CASE("crop extracts the exact window and validates bounds") {
  Rng rng(1);
  Raster src = random_raster(10, 7, rng);
  Raster c = crop(src, 3, 2, 4, 5);
  REQUIRE(c.width == 4);
  REQUIRE(c.height == 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 4; ++x)
      for (int ch = 0; ch < 3; ++ch)
        CHECK(c.at(x, y)[ch] == src.at(x + 3, y + 2)[ch]);
  CHECK_THROWS_AS(crop(src, 7, 0, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(crop(src, 0, 0, 0, 2), std::invalid_argument);
}

TEST_CASE("tile_grid splits divisible rasters exactly and reassembles") {
  Rng rng(2);
  Raster src = random_raster(12, 9, rng);
  PatchSet set = tile_grid(src, {3, 4});
  REQUIRE(set.patches.size() == 12);
  CHECK(set.patch_width == 3);
  CHECK(set.patch_height == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(set.patch(i, j) == crop(src, j * 3, i * 3, 3, 3));
  CHECK(reassemble(set) == src);
}

TEST_CASE("tile_grid trims indivisible excess symmetrically") {
  Rng rng(3);
  Raster src = random_raster(14, 10, rng);
  PatchSet set = tile_grid(src, {3, 4});  // 14 = 4*3 + 2, 10 = 3*3 + 1
  CHECK(set.patch_width == 3);
  CHECK(set.patch_height == 3);
  // floor(2/2)=1 off the left, floor(1/2)=0 off the top.
  CHECK(set.patch(0, 0) == crop(src, 1, 0, 3, 3));
  CHECK(reassemble(set) == crop(src, 1, 0, 12, 9));
}

TEST_CASE("tile_grid rejects grids larger than the raster") {
  Rng rng(4);
  Raster src = random_raster(4, 4, rng);
  CHECK_THROWS_AS(tile_grid(src, {5, 1}), std::invalid_argument);
}

TEST_CASE("central_crop anchors at the floored center") {
  Rng rng(5);
  Raster src = random_raster(5, 4, rng);
  CHECK(central_crop(src, 3, 3) == crop(src, 1, 0, 3, 3));
  CHECK(central_crop(src, 5, 4) == src);
  CHECK_THROWS_AS(central_crop(src, 6, 1), std::invalid_argument);
}

TEST_CASE("resize with matching dimensions is an exact copy") {
  Rng rng(6);
  Raster src = random_raster(17, 13, rng);
  CHECK(resize(src, 17, 13) == src);
}

TEST_CASE("resize preserves constant images at any scale") {
  Raster src(5, 3);
  for (size_t i = 0; i < src.pixels.size(); ++i) src.pixels[i] = 137;
  for (auto [w, h] : {std::pair{1, 1}, {2, 7}, {11, 4}, {64, 64}}) {
    Raster out = resize(src, w, h);
    for (uint8_t v : out.pixels) REQUIRE(v == 137);
  }
}

TEST_CASE("resize computes known bilinear values") {
  // 2x2 -> 1x1 samples the exact center: the mean of all four pixels.
  Raster src(2, 2);
  uint8_t vals[4] = {10, 20, 30, 41};
  for (int i = 0; i < 4; ++i)
    for (int ch = 0; ch < 3; ++ch) src.pixels[size_t(i) * 3 + ch] = vals[i];
  Raster out = resize(src, 1, 1);
  // (10+20+30+41)/4 = 25.25 -> 25
  CHECK(out.pixels[0] == 25);

  // 1x2 -> 1x4 with clamped half-pixel sampling: y centers map to
  // -0.25, 0.25, 0.75, 1.25 -> clamped lerp of 0 and 100.
  Raster col(1, 2);
  for (int ch = 0; ch < 3; ++ch) {
    col.pixels[ch] = 0;
    col.pixels[3 + ch] = 100;
  }
  Raster up = resize(col, 1, 4);
  CHECK(up.pixels[0] == 0);
  CHECK(up.pixels[3] == 25);
  CHECK(up.pixels[6] == 75);
  CHECK(up.pixels[9] == 100);
}

TEST_CASE("resize rounds half away from zero") {
  // Average of 10 and 15 at the midpoint = 12.5 -> 13.
  Raster src(2, 1);
  for (int ch = 0; ch < 3; ++ch) {
    src.pixels[ch] = 10;
    src.pixels[3 + ch] = 15;
  }
  Raster out = resize(src, 1, 1);
  CHECK(out.pixels[0] == 13);
}

TEST_CASE("resize commutes with dihedral ops at exact integer ratios") {
  // At a dyadic scale the sampling positions mirror exactly, so resizing
  // then transforming equals transforming then resizing, bitwise. This
  // underpins caching patches at input size before augmentation.
  Rng rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    Raster src = random_raster(128, 128, rng);
    for (int k = 0; k < 4; ++k) {
      CHECK(resize(rotate90(src, k), 64, 64) == rotate90(resize(src, 64, 64), k));
    }
    for (FlipAxis axis : {FlipAxis::kHorizontal, FlipAxis::kVertical}) {
      CHECK(resize(flip(src, axis), 64, 64) == flip(resize(src, 64, 64), axis));
    }
  }
  // Same property at the 200 -> 64 ratio the default patch path uses.
  Raster patch = random_raster(200, 200, rng);
  CHECK(resize(rotate90(patch, 1), 64, 64) ==
        rotate90(resize(patch, 64, 64), 1));
  CHECK(resize(flip(patch, FlipAxis::kHorizontal), 64, 64) ==
        flip(resize(patch, 64, 64), FlipAxis::kHorizontal));
}

TEST_CASE("resize rejects empty targets and sources") {
  Rng rng(8);
  Raster src = random_raster(4, 4, rng);
  CHECK_THROWS_AS(resize(src, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(resize(Raster{}, 4, 4), std::invalid_argument);
}
