#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchvote/augment.hpp"
#include "patchvote/cnn.hpp"
#include "patchvote/dataset.hpp"
#include "patchvote/raster.hpp"

namespace patchvote {

// Decoded, tiled, input-sized views of every manifest record, built once and
// shared across folds/modes. Patches are stored already resized to the
// classifier input so training and inference read the same bytes.
class ImageCache {
 public:
  // `wanted` (parallel to records, nonzero = materialize) limits decoding to
  // a subset; un-materialized records keep empty slots. keep_full retains the
  // decoded originals for whole-image protocols.
  ImageCache(const DatasetManifest& m, const std::string& root_dir,
             const GridSpec& grid, int input_size, bool keep_full,
             const std::vector<char>* wanted = nullptr, int threads = 1);

  size_t size() const { return patches_.size(); }
  const GridSpec& grid() const { return grid_; }
  int input_size() const { return input_size_; }
  int label(size_t record) const { return labels_[record]; }

  // grid.rows*grid.cols patches, each input_size x input_size.
  const std::vector<Raster>& patches(size_t record) const;
  // Central crop at the grid's patch size, resized to input_size.
  const Raster& central_patch(size_t record) const;
  // Decoded original (requires keep_full).
  const Raster& full_image(size_t record) const;

 private:
  GridSpec grid_;
  int input_size_ = 0;
  std::vector<int> labels_;
  std::vector<std::vector<Raster>> patches_;
  std::vector<Raster> central_;
  std::vector<Raster> full_;
};

// Apply a dihedral op to an input-sized patch, writing unit-interval
// channel-major floats; exactly raster_to_chw(apply_dihedral(patch, op)).
void dihedral_to_chw(const Raster& patch, const DihedralOp& op, float* chw);

// Patch-level training source. kNone presents each cached patch once; kTdli
// presents the 4-rotation expansion with seeded flips — the plan is
// tdli_plan(total patch count, Rng(seed)) over the concatenated patch
// sequence of the training records, so it matches the literal expansion of
// that sequence. The expansion is fixed once (the set is expanded, not
// resampled per epoch).
class PatchTrainSource final : public TrainingSource {
 public:
  PatchTrainSource(const ImageCache& cache,
                   std::span<const size_t> train_records, AugmentKind kind,
                   uint64_t seed);

  size_t size() const override { return items_.size(); }
  int label(size_t index) const override;
  void fill_input(size_t index, int epoch, int side,
                  float* chw) const override;

  // Records that actually contribute samples (provenance for leak checks).
  std::vector<size_t> contributing_records() const;

 private:
  struct Item {
    uint32_t record;
    uint16_t patch;
    DihedralOp op;
  };
  const ImageCache* cache_;
  std::vector<Item> items_;
};

// The 20-sample whole-image expansion, materialized once at construction
// (stream "vl.image", record index) and stored at input size.
class VlTrainSource final : public TrainingSource {
 public:
  VlTrainSource(const ImageCache& cache, std::span<const size_t> train_records,
                uint64_t seed);

  size_t size() const override { return images_.size(); }
  int label(size_t index) const override { return labels_[index]; }
  void fill_input(size_t index, int epoch, int side,
                  float* chw) const override;
  std::vector<size_t> contributing_records() const;

 private:
  std::vector<Raster> images_;
  std::vector<int> labels_;
  std::vector<size_t> records_;
};

// One fresh whole-image sample per original per epoch (stream "tang.sample",
// ordinal epoch * n + index), materialized on demand.
class TangTrainSource final : public TrainingSource {
 public:
  TangTrainSource(const ImageCache& cache,
                  std::span<const size_t> train_records, uint64_t seed);

  size_t size() const override { return records_.size(); }
  int label(size_t index) const override;
  void fill_input(size_t index, int epoch, int side,
                  float* chw) const override;
  std::vector<size_t> contributing_records() const;

 private:
  const ImageCache* cache_;
  std::vector<size_t> records_;
  uint64_t seed_ = 0;
};

}  // namespace patchvote
