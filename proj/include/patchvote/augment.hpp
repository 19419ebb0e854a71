#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchvote/raster.hpp"
#include "patchvote/rng.hpp"

namespace patchvote {

enum class FlipAxis { kHorizontal, kVertical };

// Quarter-turn rotation, counter-clockwise, k taken mod 4.
Raster rotate90(const Raster& src, int k);

// kHorizontal mirrors left-right (x -> W-1-x), kVertical top-bottom.
Raster flip(const Raster& src, FlipAxis axis);

// Arbitrary-angle rotation about the raster center (positive = CCW, matching
// rotate90), bilinear resampling, reflection fill for samples that fall
// outside the source. degrees == 0 is a bitwise identity.
Raster rotate_free(const Raster& src, double degrees);

// Per-pixel multiplicative brightness with clamping to [0, 255].
Raster adjust_brightness(const Raster& src, double factor);

// Resize height by `factor` (width untouched), then reflection-pad or
// center-crop back to the original height.
Raster zoom_height(const Raster& src, double factor);
Raster random_zoom_height(const Raster& src, Rng& rng);  // factor ~ U[0.8,1.2]

// One output patch of the rotation-expansion protocol: quarter_turns applied
// first, then the optional horizontal and vertical mirrors.
struct DihedralOp {
  size_t source = 0;  // index into the input patch sequence
  int quarter_turns = 0;
  bool hflip = false;
  bool vflip = false;
};

Raster apply_dihedral(const Raster& src, const DihedralOp& op);

// Expansion plan: each input patch s yields outputs 4*s+k for k in 0..3 with
// quarter_turns = k and two independent fair-coin mirror draws per output
// (stream "tdli.flip", ordinal 4*s+k; draw order: horizontal, vertical).
std::vector<DihedralOp> tdli_plan(size_t patch_count, const Rng& rng);

// Rotation-expansion applied literally: 4 outputs per input, in plan order.
std::vector<Raster> tdli_expand(std::span<const Raster> patches,
                                const Rng& rng);
std::vector<Raster> tdli_expand(std::span<const Raster> patches,
                                std::span<const DihedralOp> plan);

// Whole-image 20-fold expansion: central_crop(3000x3000), then for sample
// t in 0..19 (stream "vl.sample", t; draw order zoom, mirror, angle):
// random_zoom_height -> horizontal mirror with p=0.5 -> rotate_free with
// U[-45,45] degrees -> resize to 299x299. Requires at least 3000x3000 input.
std::vector<Raster> vl_protocol(const Raster& src, const Rng& rng);
Raster vl_apply(const Raster& cropped, double zoom, bool mirror,
                double degrees);  // deterministic core, post-crop

// Whole-image protocol producing one fresh sample per call (draw order
// angle, brightness): rotate_free with U[-45,45] degrees -> adjust_brightness
// with U[0.8,1.2] -> unconditional horizontal mirror -> resize to 224x224.
Raster tang_protocol(const Raster& src, Rng& rng);
Raster tang_apply(const Raster& src, double degrees, double brightness);

enum class AugmentKind { kNone, kTdli, kVerlyLopes, kTang };

AugmentKind parse_augment(const std::string& name);
std::string augment_to_string(AugmentKind kind);

}  // namespace patchvote
