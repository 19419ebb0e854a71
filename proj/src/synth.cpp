#include "patchvote/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "patchvote/codec.hpp"
#include "patchvote/rng.hpp"

namespace patchvote {

SynthSpec SynthSpec::preset(int num_classes, int images_per_class, int width,
                            int height, uint64_t seed) {
  SynthSpec spec;
  spec.num_classes = num_classes;
  spec.images_per_class = images_per_class;
  spec.width = width;
  spec.height = height;
  spec.seed = seed;
  for (int c = 0; c < num_classes; ++c) {
    SynthClassParams p;
    p.grain_period = ((c & 1) ? 14.0 : 10.0) + 4.0 * (c / 8);
    p.grain_orientation = (c & 2) ? 30.0 : -30.0;
    p.pore_density = (c & 4) ? 375.0 : 125.0;
    p.pore_radius = 5.0;
    spec.classes.push_back(p);
  }
  return spec;
}

void SynthSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("need at least 2 classes");
  if (images_per_class < 1)
    throw std::invalid_argument("images_per_class must be >= 1");
  if (width < 16 || height < 16)
    throw std::invalid_argument("image dimensions must be at least 16x16");
  if (int(classes.size()) != num_classes)
    throw std::invalid_argument("class parameter list does not match "
                                "num_classes");
  for (const SynthClassParams& p : classes) {
    if (p.grain_period < 2.0)
      throw std::invalid_argument("grain period must be >= 2 pixels");
    if (p.pore_radius < 1.0)
      throw std::invalid_argument("pore radius must be >= 1 pixel");
    if (p.pore_density < 0.0)
      throw std::invalid_argument("pore density must be >= 0");
  }
}

namespace {

constexpr int kGrainComponents = 10;
constexpr double kGrainBandwidth = 0.12;  // relative frequency spread
constexpr double kGrainAmplitude = 16.0;  // gray levels
constexpr double kPoreDepth = 60.0;       // gray levels at pore center
constexpr double kBaseTone[3] = {168.0, 132.0, 92.0};

// 1-D narrowband grain profile sampled on a half-pixel lattice; per-pixel
// evaluation is a linear interpolation into this table.
struct GrainProfile {
  double origin = 0.0;
  double step = 0.5;
  std::vector<double> values;

  double at(double u) const {
    double t = (u - origin) / step;
    size_t i = size_t(t);
    if (i + 1 >= values.size()) i = values.size() - 2;
    double f = t - double(i);
    return values[i] + f * (values[i + 1] - values[i]);
  }
};

GrainProfile make_grain(double period, double diag, Rng& rng) {
  double freq[kGrainComponents];
  double phase[kGrainComponents];
  double amp[kGrainComponents];
  double scale = kGrainAmplitude / std::sqrt(double(kGrainComponents) / 2.0);
  for (int m = 0; m < kGrainComponents; ++m) {
    freq[m] = (1.0 + rng.uniform(-kGrainBandwidth, kGrainBandwidth)) / period;
    phase[m] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    amp[m] = scale * rng.uniform(0.75, 1.25);
  }
  GrainProfile g;
  g.origin = -diag;
  g.step = 0.5;
  size_t n = size_t(std::ceil(2.0 * diag / g.step)) + 2;
  g.values.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double u = g.origin + double(i) * g.step;
    double v = 0.0;
    for (int m = 0; m < kGrainComponents; ++m)
      v += amp[m] * std::sin(2.0 * std::numbers::pi * freq[m] * u + phase[m]);
    g.values[i] = v;
  }
  return g;
}

}  // namespace

Raster synth_image(const SynthSpec& spec, int class_idx, int image_idx) {
  spec.validate();
  if (class_idx < 0 || class_idx >= spec.num_classes)
    throw std::out_of_range("class index out of range");
  if (image_idx < 0 || image_idx >= spec.images_per_class)
    throw std::out_of_range("image index out of range");

  const SynthClassParams& cls = spec.classes[size_t(class_idx)];
  int w = spec.width, h = spec.height;
  uint64_t ordinal =
      uint64_t(class_idx) * uint64_t(spec.images_per_class) + uint64_t(image_idx);
  Rng image_rng = Rng(spec.seed).stream("synth.image", ordinal);

  // Per-image brightness jitter dominates the residual brightness footprint
  // of the pore density, so mean tone carries no class signal.
  double jitter = image_rng.uniform(-6.0, 6.0);
  // Expected mean darkening from pores: coverage * depth * mean falloff.
  // E[r^2] over the 0.8..1.2 radius jitter is r^2 * 304/300.
  double mean_r2 = cls.pore_radius * cls.pore_radius * (304.0 / 300.0);
  double pore_mean = cls.pore_density * 1e-6 * std::numbers::pi * mean_r2 *
                     kPoreDepth * 0.5;
  double base[3];
  for (int c = 0; c < 3; ++c) base[c] = kBaseTone[c] + jitter + pore_mean;

  double theta = cls.grain_orientation * std::numbers::pi / 180.0;
  double ct = std::cos(theta), st = std::sin(theta);
  double diag = std::hypot(double(w), double(h)) + 2.0;
  Rng grain_rng = image_rng.stream("grain");
  GrainProfile grain = make_grain(cls.grain_period, diag, grain_rng);

  // Accumulate in a float buffer; quantize once at the end.
  std::vector<float> acc(size_t(w) * h);
  for (int y = 0; y < h; ++y) {
    double row_u = y * st;
    for (int x = 0; x < w; ++x)
      acc[size_t(y) * w + x] = float(grain.at(x * ct + row_u));
  }

  // Pores: darkened discs with a quadratic falloff.
  Rng pore_rng = image_rng.stream("pores");
  double mpx = double(w) * double(h) * 1e-6;
  long count = std::lround(cls.pore_density * mpx * pore_rng.uniform(0.9, 1.1));
  for (long p = 0; p < count; ++p) {
    double cx = pore_rng.uniform(0.0, double(w));
    double cy = pore_rng.uniform(0.0, double(h));
    double r = cls.pore_radius * pore_rng.uniform(0.8, 1.2);
    int x0 = std::max(0, int(std::floor(cx - r)));
    int x1 = std::min(w - 1, int(std::ceil(cx + r)));
    int y0 = std::max(0, int(std::floor(cy - r)));
    int y1 = std::min(h - 1, int(std::ceil(cy + r)));
    double inv_r2 = 1.0 / (r * r);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        double fall = 1.0 - d2 * inv_r2;
        if (fall > 0.0)
          acc[size_t(y) * w + x] -= float(kPoreDepth * fall);
      }
  }

  // Triangular pixel noise (cheap, bounded, variance noise_level^2).
  Rng noise_rng = image_rng.stream("noise");
  double noise_scale = spec.noise_level * std::sqrt(6.0);
  Raster out(w, h);
  for (size_t i = 0; i < acc.size(); ++i) {
    double n = (noise_rng.uniform() + noise_rng.uniform() - 1.0) * noise_scale;
    double v = acc[i] + n;
    uint8_t* px = out.pixels.data() + i * 3;
    for (int c = 0; c < 3; ++c) {
      long q = std::lround(base[c] + v);
      px[c] = uint8_t(q < 0 ? 0 : q > 255 ? 255 : q);
    }
  }
  return out;
}

DatasetManifest synth_generate(const SynthSpec& spec,
                               const std::string& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + out_dir +
                             "': " + ec.message());

  std::vector<SampleRecord> records;
  char name[64];
  for (int c = 0; c < spec.num_classes; ++c) {
    std::snprintf(name, sizeof(name), "species_%02d", c);
    std::string label = name;
    fs::path class_dir = fs::path(out_dir) / "images" / label;
    fs::create_directories(class_dir, ec);
    if (ec)
      throw std::runtime_error("cannot create directory '" +
                               class_dir.string() + "': " + ec.message());
    for (int i = 0; i < spec.images_per_class; ++i) {
      std::snprintf(name, sizeof(name), "img_%03d.png", i);
      std::string rel = "images/" + label + "/" + name;
      write_png((fs::path(out_dir) / rel).string(), synth_image(spec, c, i));
      std::snprintf(name, sizeof(name), "%s_s%03d", label.c_str(), i);
      records.push_back({rel, label, name});
    }
  }
  DatasetManifest manifest = manifest_from_records(std::move(records));
  save_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace patchvote
