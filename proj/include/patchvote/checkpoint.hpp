#pragma once

#include <optional>
#include <string>
#include <vector>

#include "patchvote/augment.hpp"
#include "patchvote/cnn.hpp"
#include "patchvote/raster.hpp"

namespace patchvote {

// Experiment provenance carried inside a checkpoint so inference can refuse
// mismatched grids. Stored as reserved "meta.*" arrays after the weights.
struct CheckpointMeta {
  std::optional<GridSpec> grid;
  std::optional<AugmentKind> augment;
};

struct LoadedCheckpoint {
  SmallCnn<float> net;
  std::vector<std::string> labels;  // canonical class order
  CheckpointMeta meta;
};

// Binary container: magic "PVW1"; u32 LE version; u32 class count; per class
// a length-prefixed UTF-8 label; u32 input_size; u32 array count; per array a
// length-prefixed name, u32 rank, u32 dims, then f32 LE row-major data.
void save_checkpoint(const SmallCnn<float>& net,
                     const std::vector<std::string>& labels,
                     const CheckpointMeta& meta, const std::string& path);

// Throws std::runtime_error on bad magic/version, truncation, unknown array
// names, or shapes inconsistent with the architecture.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace patchvote
