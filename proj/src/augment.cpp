#include "patchvote/augment.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace patchvote {

namespace {

inline void copy_px(const Raster& src, int sx, int sy, Raster& dst, int dx,
                    int dy) {
  const uint8_t* s = src.at(sx, sy);
  uint8_t* d = dst.at(dx, dy);
  d[0] = s[0];
  d[1] = s[1];
  d[2] = s[2];
}

}  // namespace

Raster rotate90(const Raster& src, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return src;
  int w = src.width, h = src.height;
  Raster out(k == 2 ? w : h, k == 2 ? h : w);
  switch (k) {
    case 1:  // CCW: out(x',y') <- src(W-1-y', x')
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
          copy_px(src, w - 1 - y, x, out, x, y);
      break;
    case 2:
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
          copy_px(src, w - 1 - x, h - 1 - y, out, x, y);
      break;
    case 3:  // CW: out(x',y') <- src(y', H-1-x')
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
          copy_px(src, y, h - 1 - x, out, x, y);
      break;
  }
  return out;
}

Raster flip(const Raster& src, FlipAxis axis) {
  Raster out(src.width, src.height);
  if (axis == FlipAxis::kHorizontal) {
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        copy_px(src, src.width - 1 - x, y, out, x, y);
  } else {
    size_t row_bytes = size_t(src.width) * Raster::kChannels;
    for (int y = 0; y < src.height; ++y)
      std::memcpy(out.at(0, y), src.at(0, src.height - 1 - y), row_bytes);
  }
  return out;
}

namespace {

// Mirror an out-of-range tap index back into [0, n) (whole-sample
// reflection: -1 -> 0, n -> n-1).
inline int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

Raster rotate_free(const Raster& src, double degrees) {
  if (src.empty()) throw std::invalid_argument("rotate_free of empty raster");
  if (degrees == 0.0) return src;

  double rad = degrees * std::numbers::pi / 180.0;
  double c = std::cos(rad), s = std::sin(rad);
  double cx = (src.width - 1) / 2.0, cy = (src.height - 1) / 2.0;
  Raster out(src.width, src.height);
  for (int y = 0; y < src.height; ++y) {
    double dy = y - cy;
    for (int x = 0; x < src.width; ++x) {
      double dx = x - cx;
      // Inverse map: the source location that lands on (x, y) after a CCW
      // rotation by `degrees` about the center.
      double sx = cx + c * dx - s * dy;
      double sy = cy + s * dx + c * dy;
      int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
      double fx = sx - x0, fy = sy - y0;
      int xl = reflect_index(x0, src.width);
      int xh = reflect_index(x0 + 1, src.width);
      int yl = reflect_index(y0, src.height);
      int yh = reflect_index(y0 + 1, src.height);
      const uint8_t* p00 = src.at(xl, yl);
      const uint8_t* p10 = src.at(xh, yl);
      const uint8_t* p01 = src.at(xl, yh);
      const uint8_t* p11 = src.at(xh, yh);
      uint8_t* d = out.at(x, y);
      for (int ch = 0; ch < Raster::kChannels; ++ch) {
        double top = p00[ch] + fx * (p10[ch] - p00[ch]);
        double bot = p01[ch] + fx * (p11[ch] - p01[ch]);
        d[ch] = uint8_t(std::llround(top + fy * (bot - top)));
      }
    }
  }
  return out;
}

Raster adjust_brightness(const Raster& src, double factor) {
  Raster out(src.width, src.height);
  // 8-bit lookup table; round half away from zero, clamp to [0, 255].
  uint8_t lut[256];
  for (int v = 0; v < 256; ++v) {
    long r = std::lround(v * factor);
    lut[v] = uint8_t(r < 0 ? 0 : r > 255 ? 255 : r);
  }
  for (size_t i = 0; i < src.pixels.size(); ++i) out.pixels[i] = lut[src.pixels[i]];
  return out;
}

Raster zoom_height(const Raster& src, double factor) {
  if (src.empty()) throw std::invalid_argument("zoom of empty raster");
  int new_h = int(std::lround(src.height * factor));
  if (new_h < 1) new_h = 1;
  if (new_h == src.height) return src;
  Raster scaled = resize(src, src.width, new_h);
  if (new_h > src.height)
    return central_crop(scaled, src.width, src.height);
  // Reflection-pad back to the original height, centered.
  Raster out(src.width, src.height);
  int pad_top = (src.height - new_h) / 2;
  size_t row_bytes = size_t(src.width) * Raster::kChannels;
  for (int y = 0; y < src.height; ++y) {
    int sy = reflect_index(y - pad_top, new_h);
    std::memcpy(out.at(0, y), scaled.at(0, sy), row_bytes);
  }
  return out;
}

Raster random_zoom_height(const Raster& src, Rng& rng) {
  return zoom_height(src, rng.uniform(0.8, 1.2));
}

Raster apply_dihedral(const Raster& src, const DihedralOp& op) {
  Raster out = rotate90(src, op.quarter_turns);
  if (op.hflip) out = flip(out, FlipAxis::kHorizontal);
  if (op.vflip) out = flip(out, FlipAxis::kVertical);
  return out;
}

std::vector<DihedralOp> tdli_plan(size_t patch_count, const Rng& rng) {
  std::vector<DihedralOp> plan;
  plan.reserve(patch_count * 4);
  for (size_t s = 0; s < patch_count; ++s) {
    for (int k = 0; k < 4; ++k) {
      Rng draws = rng.stream("tdli.flip", 4 * s + k);
      DihedralOp op;
      op.source = s;
      op.quarter_turns = k;
      op.hflip = draws.bernoulli(0.5);
      op.vflip = draws.bernoulli(0.5);
      plan.push_back(op);
    }
  }
  return plan;
}

std::vector<Raster> tdli_expand(std::span<const Raster> patches,
                                std::span<const DihedralOp> plan) {
  std::vector<Raster> out;
  out.reserve(plan.size());
  for (const DihedralOp& op : plan) {
    if (op.source >= patches.size())
      throw std::out_of_range("dihedral plan references missing patch");
    out.push_back(apply_dihedral(patches[op.source], op));
  }
  return out;
}

std::vector<Raster> tdli_expand(std::span<const Raster> patches,
                                const Rng& rng) {
  return tdli_expand(patches, tdli_plan(patches.size(), rng));
}

Raster vl_apply(const Raster& cropped, double zoom, bool mirror,
                double degrees) {
  Raster r = zoom_height(cropped, zoom);
  if (mirror) r = flip(r, FlipAxis::kHorizontal);
  r = rotate_free(r, degrees);
  return resize(r, 299, 299);
}

std::vector<Raster> vl_protocol(const Raster& src, const Rng& rng) {
  if (src.width < 3000 || src.height < 3000)
    throw std::invalid_argument(
        "vl protocol needs at least 3000x3000 input, got " +
        std::to_string(src.width) + "x" + std::to_string(src.height));
  Raster cropped = central_crop(src, 3000, 3000);
  std::vector<Raster> out;
  out.reserve(20);
  for (uint64_t t = 0; t < 20; ++t) {
    Rng draws = rng.stream("vl.sample", t);
    double zoom = draws.uniform(0.8, 1.2);
    bool mirror = draws.bernoulli(0.5);
    double degrees = draws.uniform(-45.0, 45.0);
    out.push_back(vl_apply(cropped, zoom, mirror, degrees));
  }
  return out;
}

Raster tang_apply(const Raster& src, double degrees, double brightness) {
  Raster r = rotate_free(src, degrees);
  r = adjust_brightness(r, brightness);
  r = flip(r, FlipAxis::kHorizontal);
  return resize(r, 224, 224);
}

Raster tang_protocol(const Raster& src, Rng& rng) {
  double degrees = rng.uniform(-45.0, 45.0);
  double brightness = rng.uniform(0.8, 1.2);
  return tang_apply(src, degrees, brightness);
}

AugmentKind parse_augment(const std::string& name) {
  if (name == "none") return AugmentKind::kNone;
  if (name == "tdli") return AugmentKind::kTdli;
  if (name == "vl") return AugmentKind::kVerlyLopes;
  if (name == "tang") return AugmentKind::kTang;
  throw std::invalid_argument("unknown augmentation '" + name +
                              "' (expected none|tdli|vl|tang)");
}

std::string augment_to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kNone: return "none";
    case AugmentKind::kTdli: return "tdli";
    case AugmentKind::kVerlyLopes: return "vl";
    case AugmentKind::kTang: return "tang";
  }
  throw std::logic_error("bad augment kind");
}

}  // namespace patchvote
