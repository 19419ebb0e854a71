#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchvote/codec.hpp"
#include "test_util.hpp"

using namespace patchvote;
using testutil::noisy_raster;
using testutil::slurp;

namespace {

struct TempDir : testutil::TempDir {
  TempDir() : testutil::TempDir("codec") {}
};

}  // namespace

TEST_CASE("png survives a round trip bit for bit") {
  TempDir tmp;
  Raster original = noisy_raster(37, 23, 101);
  std::string path = tmp.file("roundtrip.png");
  write_png(path, original);

  Raster back = decode_image(path);
  REQUIRE(back.width == 37);
  REQUIRE(back.height == 23);
  CHECK(back.pixels == original.pixels);
}

TEST_CASE("png encoding is byte reproducible") {
  TempDir tmp;
  Raster img = noisy_raster(24, 18, 55);
  write_png(tmp.file("a.png"), img);
  write_png(tmp.file("b.png"), img);
  CHECK(slurp(tmp.file("a.png")) == slurp(tmp.file("b.png")));
}

TEST_CASE("jpeg round trip is close but lossy") {
  TempDir tmp;
  // Smooth gradient: JPEG should track it closely at high quality.
  Raster original(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c)
        original.at(x, y)[c] = uint8_t(2 * x + y + 20 * c);
  std::string path = tmp.file("photo.jpg");
  write_jpeg(path, original, 95);

  Raster back = decode_image(path);
  REQUIRE(back.width == original.width);
  REQUIRE(back.height == original.height);
  long worst = 0;
  for (size_t i = 0; i < back.pixels.size(); ++i) {
    long diff = std::abs(long(back.pixels[i]) - long(original.pixels[i]));
    worst = std::max(worst, diff);
  }
  CHECK(worst <= 12);
  CHECK(worst > 0);  // lossy: an exact copy would be suspicious
}

TEST_CASE("format detection reads signatures, not extensions") {
  TempDir tmp;
  Raster img = noisy_raster(16, 16, 7);
  // PNG bytes behind a .jpg name must still decode as PNG.
  std::string lying = tmp.file("mislabeled.jpg");
  write_png(lying, img);
  Raster back = decode_image(lying);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("decode errors name the offending file") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(decode_image(tmp.file("missing.png")),
                       doctest::Contains("missing.png"), std::runtime_error);

  std::string garbage = tmp.file("garbage.png");
  {
    std::ofstream out(garbage, std::ios::binary);
    out << "this is not an image at all, not even close";
  }
  CHECK_THROWS_WITH_AS(decode_image(garbage), doctest::Contains("garbage.png"),
                       std::runtime_error);

  std::string truncated = tmp.file("truncated.png");
  {
    Raster img = noisy_raster(48, 48, 9);
    write_png(truncated, img);
    auto bytes = slurp(truncated);
    std::ofstream out(truncated, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size() / 2));
  }
  CHECK_THROWS_AS(decode_image(truncated), std::runtime_error);
}

TEST_CASE("write errors name the destination") {
  Raster img = noisy_raster(8, 8, 1);
  CHECK_THROWS_WITH_AS(write_png("/nonexistent-dir/out.png", img),
                       doctest::Contains("/nonexistent-dir/out.png"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(write_jpeg("/nonexistent-dir/out.jpg", img, 90),
                       doctest::Contains("/nonexistent-dir/out.jpg"),
                       std::runtime_error);
}

TEST_CASE("jpeg quality must be sane") {
  TempDir tmp;
  Raster img = noisy_raster(8, 8, 2);
  CHECK_THROWS_AS(write_jpeg(tmp.file("q.jpg"), img, 0), std::invalid_argument);
  CHECK_THROWS_AS(write_jpeg(tmp.file("q.jpg"), img, 101),
                  std::invalid_argument);
}

TEST_CASE("grayscale png decodes to three equal channels") {
  TempDir tmp;
  // Hand-rolled write: encode a gray PNG via libpng is not exposed, so write
  // an RGB image with equal channels and check the decoder's contract on it;
  // the gray expansion path is covered by the synthetic corpus elsewhere.
  Raster img(5, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y)[c] = uint8_t(10 * x + y);
  std::string path = tmp.file("gray.png");
  write_png(path, img);
  Raster back = decode_image(path);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) {
      CHECK(back.at(x, y)[0] == back.at(x, y)[1]);
      CHECK(back.at(x, y)[1] == back.at(x, y)[2]);
    }
}
