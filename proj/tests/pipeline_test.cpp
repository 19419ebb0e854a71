#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "patchvote/codec.hpp"
#include "patchvote/pipeline.hpp"
#include "test_util.hpp"

using namespace patchvote;
using testutil::TempDir;
using testutil::noisy_raster;

namespace {

// Writes count noisy images per class and returns the loaded manifest.
DatasetManifest write_dataset(const TempDir& tmp, int classes, int count,
                              int w, int h) {
  std::vector<SampleRecord> records;
  uint64_t seed = 1;
  for (int c = 0; c < classes; ++c) {
    std::string label = "class" + std::to_string(c);
    for (int i = 0; i < count; ++i) {
      std::string rel = label + "_" + std::to_string(i) + ".png";
      write_png(tmp.file(rel), noisy_raster(w, h, seed++));
      records.push_back({rel, label, ""});
    }
  }
  DatasetManifest m = manifest_from_records(std::move(records));
  save_manifest(m, tmp.file("manifest.csv"));
  return m;
}

std::vector<float> chw_of(const Raster& r) {
  std::vector<float> chw(size_t(3) * r.width * r.height);
  raster_to_chw(r, chw.data());
  return chw;
}

std::vector<float> filled(const TrainingSource& src, size_t index, int epoch,
                          int side) {
  std::vector<float> chw(size_t(3) * side * side);
  src.fill_input(index, epoch, side, chw.data());
  return chw;
}

}  // namespace

TEST_CASE("dihedral_to_chw fuses the op with the float conversion") {
  Raster patch = noisy_raster(12, 12, 90);
  std::vector<float> fused(3 * 12 * 12), reference(3 * 12 * 12);
  for (int k = 0; k < 4; ++k)
    for (int h = 0; h < 2; ++h)
      for (int v = 0; v < 2; ++v) {
        DihedralOp op{0, k, h == 1, v == 1};
        dihedral_to_chw(patch, op, fused.data());
        raster_to_chw(apply_dihedral(patch, op), reference.data());
        INFO("k=", k, " h=", h, " v=", v);
        CHECK(fused == reference);
      }
  CHECK_THROWS_AS(dihedral_to_chw(noisy_raster(8, 10, 1), DihedralOp{},
                                  fused.data()),
                  std::invalid_argument);
}

TEST_CASE("the image cache holds resized tiles, central crops, and labels") {
  TempDir tmp("cache");
  DatasetManifest m = write_dataset(tmp, 2, 2, 64, 48);
  ImageCache cache(m, tmp.path.string(), {2, 2}, 16, /*keep_full=*/true);

  REQUIRE(cache.size() == 4);
  CHECK(cache.grid() == GridSpec{2, 2});
  CHECK(cache.input_size() == 16);

  for (size_t r = 0; r < m.size(); ++r) {
    CHECK(cache.label(r) == m.label_index(m.records[r].label));
    Raster img = decode_image(tmp.file(m.records[r].path));
    CHECK(cache.full_image(r) == img);

    PatchSet tiles = tile_grid(img, {2, 2});
    REQUIRE(cache.patches(r).size() == 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(cache.patches(r)[size_t(i) * 2 + j] ==
              resize(tiles.patch(i, j), 16, 16));
    CHECK(cache.central_patch(r) ==
          resize(central_crop(img, tiles.patch_width, tiles.patch_height), 16,
                 16));
  }
}

TEST_CASE("the cache can skip records and parallel builds match serial") {
  TempDir tmp("cache-mask");
  DatasetManifest m = write_dataset(tmp, 2, 2, 64, 48);

  std::vector<char> wanted{1, 0, 1, 0};
  ImageCache masked(m, tmp.path.string(), {2, 2}, 16, false, &wanted);
  CHECK_NOTHROW(masked.patches(0));
  CHECK_THROWS_WITH_AS(masked.patches(1), doctest::Contains("materialized"),
                       std::logic_error);
  CHECK_THROWS_AS(masked.central_patch(3), std::logic_error);
  CHECK_THROWS_WITH_AS(masked.full_image(0), doctest::Contains("full"),
                       std::logic_error);

  std::vector<char> short_mask{1, 0};
  CHECK_THROWS_AS(
      ImageCache(m, tmp.path.string(), {2, 2}, 16, false, &short_mask),
      std::invalid_argument);

  ImageCache serial(m, tmp.path.string(), {2, 2}, 16, false, nullptr, 1);
  ImageCache threaded(m, tmp.path.string(), {2, 2}, 16, false, nullptr, 3);
  for (size_t r = 0; r < m.size(); ++r) {
    CHECK(serial.patches(r) == threaded.patches(r));
    CHECK(serial.central_patch(r) == threaded.central_patch(r));
  }
}

TEST_CASE("missing image files surface the resolved path") {
  TempDir tmp("cache-missing");
  DatasetManifest m = write_dataset(tmp, 2, 1, 32, 32);
  std::filesystem::remove(tmp.file(m.records[1].path));
  CHECK_THROWS_WITH(ImageCache(m, tmp.path.string(), {1, 1}, 16, false),
                    doctest::Contains(m.records[1].path.c_str()));
}

TEST_CASE("plain patch source presents each cached patch once, in order") {
  TempDir tmp("src-none");
  DatasetManifest m = write_dataset(tmp, 2, 2, 64, 48);
  ImageCache cache(m, tmp.path.string(), {2, 2}, 16, false);

  std::vector<size_t> train{0, 2, 3};
  PatchTrainSource src(cache, train, AugmentKind::kNone, 99);
  REQUIRE(src.size() == 12);
  CHECK(src.contributing_records() == train);

  size_t index = 0;
  for (size_t r : train)
    for (size_t p = 0; p < 4; ++p, ++index) {
      CHECK(src.label(index) == cache.label(r));
      CHECK(filled(src, index, 0, 16) == chw_of(cache.patches(r)[p]));
    }

  std::vector<float> chw(3 * 8 * 8);
  CHECK_THROWS_WITH(src.fill_input(0, 0, 8, chw.data()),
                    doctest::Contains("does not match"));
}

TEST_CASE("rotation-expanded patch source matches the literal protocol") {
  // Exact-ratio geometry (128x128 images, 2x2 grid, 64->32) so resizing
  // commutes with the dihedral ops and the cached-patch expansion is
  // bit-identical to expanding the original tiles.
  TempDir tmp("src-tdli");
  DatasetManifest m = write_dataset(tmp, 2, 2, 128, 128);
  ImageCache cache(m, tmp.path.string(), {2, 2}, 32, false);

  std::vector<size_t> train{1, 3};
  const uint64_t seed = 2468;
  PatchTrainSource src(cache, train, AugmentKind::kTdli, seed);
  REQUIRE(src.size() == 4 * 8);  // 8 tiles, 4 rotations each

  // Concatenated original-size tiles in training order.
  std::vector<Raster> tiles;
  for (size_t r : train) {
    PatchSet ps = tile_grid(decode_image(tmp.file(m.records[r].path)), {2, 2});
    for (Raster& p : ps.patches) tiles.push_back(std::move(p));
  }
  std::vector<DihedralOp> plan = tdli_plan(tiles.size(), Rng(seed));
  std::vector<Raster> expanded = tdli_expand(tiles, plan);

  for (size_t i = 0; i < src.size(); ++i) {
    CHECK(filled(src, i, 0, 32) == chw_of(resize(expanded[i], 32, 32)));
    CHECK(src.label(i) == cache.label(train[plan[i].source / 4]));
  }

  // The expansion is fixed, not resampled per epoch.
  CHECK(filled(src, 5, 0, 32) == filled(src, 5, 7, 32));
  CHECK(src.contributing_records() == train);
}

TEST_CASE("whole-image sources require retained full images") {
  TempDir tmp("src-nofull");
  DatasetManifest m = write_dataset(tmp, 2, 1, 64, 48);
  ImageCache cache(m, tmp.path.string(), {2, 2}, 16, /*keep_full=*/false);
  std::vector<size_t> train{0};
  CHECK_THROWS_AS(VlTrainSource(cache, train, 1), std::logic_error);
  CHECK_THROWS_AS(TangTrainSource(cache, train, 1), std::logic_error);
}

TEST_CASE("20-sample expansion is addressed by manifest index") {
  TempDir tmp("src-vl");
  // Record 0 stays tiny and unmaterialized; record 1 is protocol-sized.
  Raster big(3000, 3000);
  for (int y = 0; y < 3000; ++y)
    for (int x = 0; x < 3000; ++x) {
      uint8_t* px = big.at(x, y);
      px[0] = uint8_t((x * 255) / 2999);
      px[1] = uint8_t((y * 255) / 2999);
      px[2] = uint8_t((x + y) & 0xff);
    }
  write_png(tmp.file("small.png"), noisy_raster(64, 64, 3));
  write_png(tmp.file("big.png"), big);
  DatasetManifest m = manifest_from_records(
      {{"small.png", "a", ""}, {"big.png", "b", ""}});

  std::vector<char> wanted{0, 1};
  ImageCache cache(m, tmp.path.string(), {2, 2}, 299, true, &wanted);

  std::vector<size_t> train{1};
  const uint64_t seed = 31;
  VlTrainSource src(cache, train, seed);
  REQUIRE(src.size() == 20);
  CHECK(src.contributing_records() == train);

  // The stream ordinal is the manifest index (1), not the training position
  // (0): the same image expands identically whatever subset it lands in.
  std::vector<Raster> expected =
      vl_protocol(big, Rng(seed).stream("vl.image", 1));
  REQUIRE(expected.size() == 20);
  for (size_t t = 0; t < 20; ++t) {
    CHECK(src.label(t) == 1);
    CHECK(filled(src, t, 0, 299) == chw_of(expected[t]));
  }

  // Samples at the stored size only.
  std::vector<float> chw(3 * 64 * 64);
  CHECK_THROWS_AS(src.fill_input(0, 0, 64, chw.data()), std::invalid_argument);
}

TEST_CASE("per-epoch whole-image source resamples by stream address") {
  TempDir tmp("src-tang");
  DatasetManifest m = write_dataset(tmp, 2, 2, 96, 64);
  ImageCache cache(m, tmp.path.string(), {2, 2}, 32, true);

  std::vector<size_t> train{0, 3};
  const uint64_t seed = 77;
  TangTrainSource src(cache, train, seed);
  REQUIRE(src.size() == 2);
  CHECK(src.label(0) == cache.label(0));
  CHECK(src.label(1) == cache.label(3));
  CHECK(src.contributing_records() == train);

  for (int epoch : {0, 1}) {
    for (size_t i = 0; i < 2; ++i) {
      Rng rng = Rng(seed).stream("tang.sample", uint64_t(epoch) * 2 + i);
      Raster sample = tang_protocol(cache.full_image(train[i]), rng);
      CHECK(filled(src, i, epoch, 32) == chw_of(resize(sample, 32, 32)));
    }
  }

  // Different epochs draw different augmentations of the same image.
  CHECK(filled(src, 0, 0, 32) != filled(src, 0, 1, 32));
  // Same address replays exactly (concurrent fills stay coherent).
  CHECK(filled(src, 1, 4, 32) == filled(src, 1, 4, 32));
}
