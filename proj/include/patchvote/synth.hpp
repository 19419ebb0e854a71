#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchvote/dataset.hpp"
#include "patchvote/raster.hpp"

namespace patchvote {

// Texture recipe for one synthetic class. Grain is narrowband quasi-periodic
// noise (random-phase sinusoids within ±12% of 1/period) rather than a pure
// tone: a pure tone survives downscaling as a coherent alias, while a
// narrowband mixture keeps a sharp native autocorrelation peak at `period`
// yet decoheres once averaged over windows much wider than the period.
struct SynthClassParams {
  double grain_period = 10.0;       // pixels
  double grain_orientation = -30.0; // degrees
  double pore_density = 125.0;      // pores per megapixel
  double pore_radius = 5.0;         // pixels
};

struct SynthSpec {
  int num_classes = 8;
  int images_per_class = 40;
  int width = 1600;
  int height = 1200;
  double noise_level = 5.0;  // pixel noise stddev, gray levels
  uint64_t seed = 0;
  std::vector<SynthClassParams> classes;  // size num_classes

  // Class grid over (period 10/14, orientation -30/+30, pore density
  // 125/375); classes beyond 8 step the grain period further.
  static SynthSpec preset(int num_classes, int images_per_class, int width,
                          int height, uint64_t seed);

  void validate() const;
};

// Deterministic image for (class, index); pure function of its arguments.
Raster synth_image(const SynthSpec& spec, int class_idx, int image_idx);

// Writes images/<label>/img_<n>.png plus manifest.csv under out_dir and
// returns the manifest (paths relative to out_dir).
DatasetManifest synth_generate(const SynthSpec& spec,
                               const std::string& out_dir);

}  // namespace patchvote
