#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace patchvote {

// Interleaved 8-bit RGB image, row-major, origin at the top-left.
struct Raster {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // height * width * kChannels bytes

  Raster() = default;
  Raster(int w, int h) : width(w), height(h), pixels(size_t(w) * h * kChannels) {}

  uint8_t* at(int x, int y) {
    return pixels.data() + (size_t(y) * width + x) * kChannels;
  }
  const uint8_t* at(int x, int y) const {
    return pixels.data() + (size_t(y) * width + x) * kChannels;
  }

  bool empty() const { return width == 0 || height == 0; }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
  }
};

struct GridSpec {
  int rows = 0;
  int cols = 0;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Parse "RxC" (e.g. "6x8"); throws on malformed input.
GridSpec parse_grid(const std::string& text);
std::string grid_to_string(const GridSpec& grid);

// Row-major collection of equally sized tiles cut from one raster.
struct PatchSet {
  GridSpec grid;
  int patch_width = 0;
  int patch_height = 0;
  std::vector<Raster> patches;  // grid.rows * grid.cols, row-major

  Raster& patch(int i, int j) { return patches[size_t(i) * grid.cols + j]; }
  const Raster& patch(int i, int j) const {
    return patches[size_t(i) * grid.cols + j];
  }
};

Raster crop(const Raster& src, int x0, int y0, int w, int h);

// Split into a rows x cols grid of equal patches. When a dimension is not
// divisible, the excess is trimmed symmetrically: floor(rem/2) pixels off the
// leading edge, the rest off the trailing edge.
PatchSet tile_grid(const Raster& src, const GridSpec& grid);

// Stitch a PatchSet back into one raster (exact inverse of tile_grid on
// divisible inputs).
Raster reassemble(const PatchSet& set);

// Crop of the given size centered on the raster (anchored at
// floor((W-w)/2), floor((H-h)/2)).
Raster central_crop(const Raster& src, int w, int h);

// Bilinear resize with half-pixel-centered sampling, edge-clamped taps, and
// round-half-away-from-zero quantization. Identity when dimensions match.
Raster resize(const Raster& src, int w, int h);

}  // namespace patchvote
