#include "patchvote/raster.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "patchvote/strings.hpp"

namespace patchvote {

GridSpec parse_grid(const std::string& text) {
  size_t x = text.find('x');
  if (x == std::string::npos) x = text.find('X');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw std::invalid_argument("bad grid spec '" + text + "', expected RxC");
  GridSpec grid;
  grid.rows = parse_int(text.substr(0, x), "grid rows");
  grid.cols = parse_int(text.substr(x + 1), "grid cols");
  if (grid.rows < 1 || grid.cols < 1)
    throw std::invalid_argument("grid dimensions must be positive: " + text);
  return grid;
}

std::string grid_to_string(const GridSpec& grid) {
  return std::to_string(grid.rows) + "x" + std::to_string(grid.cols);
}

Raster crop(const Raster& src, int x0, int y0, int w, int h) {
  if (w < 1 || h < 1) throw std::invalid_argument("crop size must be positive");
  if (x0 < 0 || y0 < 0 || x0 + w > src.width || y0 + h > src.height)
    throw std::invalid_argument(
        "crop window " + std::to_string(w) + "x" + std::to_string(h) + "+" +
        std::to_string(x0) + "+" + std::to_string(y0) +
        " exceeds raster " + std::to_string(src.width) + "x" +
        std::to_string(src.height));
  Raster out(w, h);
  size_t row_bytes = size_t(w) * Raster::kChannels;
  for (int y = 0; y < h; ++y)
    std::memcpy(out.at(0, y), src.at(x0, y0 + y), row_bytes);
  return out;
}

PatchSet tile_grid(const Raster& src, const GridSpec& grid) {
  if (grid.rows < 1 || grid.cols < 1)
    throw std::invalid_argument("grid dimensions must be positive");
  int pw = src.width / grid.cols;
  int ph = src.height / grid.rows;
  if (pw < 1 || ph < 1)
    throw std::invalid_argument("grid " + grid_to_string(grid) +
                                " larger than raster " +
                                std::to_string(src.width) + "x" +
                                std::to_string(src.height));
  int x_trim = (src.width - pw * grid.cols) / 2;
  int y_trim = (src.height - ph * grid.rows) / 2;

  PatchSet set;
  set.grid = grid;
  set.patch_width = pw;
  set.patch_height = ph;
  set.patches.reserve(size_t(grid.rows) * grid.cols);
  for (int i = 0; i < grid.rows; ++i)
    for (int j = 0; j < grid.cols; ++j)
      set.patches.push_back(crop(src, x_trim + j * pw, y_trim + i * ph, pw, ph));
  return set;
}

Raster reassemble(const PatchSet& set) {
  if (set.patches.empty()) throw std::invalid_argument("empty patch set");
  Raster out(set.patch_width * set.grid.cols, set.patch_height * set.grid.rows);
  size_t row_bytes = size_t(set.patch_width) * Raster::kChannels;
  for (int i = 0; i < set.grid.rows; ++i)
    for (int j = 0; j < set.grid.cols; ++j) {
      const Raster& p = set.patch(i, j);
      if (p.width != set.patch_width || p.height != set.patch_height)
        throw std::invalid_argument("patch set has inconsistent patch sizes");
      for (int y = 0; y < p.height; ++y)
        std::memcpy(out.at(j * set.patch_width, i * set.patch_height + y),
                    p.at(0, y), row_bytes);
    }
  return out;
}

Raster central_crop(const Raster& src, int w, int h) {
  if (w > src.width || h > src.height)
    throw std::invalid_argument(
        "central crop " + std::to_string(w) + "x" + std::to_string(h) +
        " exceeds raster " + std::to_string(src.width) + "x" +
        std::to_string(src.height));
  return crop(src, (src.width - w) / 2, (src.height - h) / 2, w, h);
}

namespace {

struct TapTable {
  std::vector<int> lo, hi;
  std::vector<double> frac;
};

// Half-pixel-centered source coordinates, clamped to the valid range.
TapTable make_taps(int src_n, int dst_n) {
  TapTable t;
  t.lo.resize(dst_n);
  t.hi.resize(dst_n);
  t.frac.resize(dst_n);
  double scale = double(src_n) / dst_n;
  for (int d = 0; d < dst_n; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    if (s < 0.0) s = 0.0;
    if (s > src_n - 1) s = src_n - 1;
    int lo = int(s);
    t.lo[d] = lo;
    t.hi[d] = lo + 1 < src_n ? lo + 1 : lo;
    t.frac[d] = s - lo;
  }
  return t;
}

}  // namespace

Raster resize(const Raster& src, int w, int h) {
  if (w < 1 || h < 1)
    throw std::invalid_argument("resize target must be positive");
  if (src.empty()) throw std::invalid_argument("resize of empty raster");
  if (w == src.width && h == src.height) return src;

  TapTable tx = make_taps(src.width, w);
  TapTable ty = make_taps(src.height, h);
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    const uint8_t* row0 = src.at(0, ty.lo[y]);
    const uint8_t* row1 = src.at(0, ty.hi[y]);
    double fy = ty.frac[y];
    uint8_t* dst = out.at(0, y);
    for (int x = 0; x < w; ++x) {
      size_t o0 = size_t(tx.lo[x]) * Raster::kChannels;
      size_t o1 = size_t(tx.hi[x]) * Raster::kChannels;
      double fx = tx.frac[x];
      for (int c = 0; c < Raster::kChannels; ++c) {
        double top = row0[o0 + c] + fx * (row0[o1 + c] - row0[o0 + c]);
        double bot = row1[o0 + c] + fx * (row1[o1 + c] - row1[o0 + c]);
        double v = top + fy * (bot - top);
        // Round half away from zero; v is a convex combination of byte
        // values, so no clamping is needed.
        dst[x * Raster::kChannels + c] = uint8_t(std::llround(v));
      }
    }
  }
  return out;
}

}  // namespace patchvote
