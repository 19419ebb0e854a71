#include "patchvote/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <utility>

#include "patchvote/codec.hpp"
#include "patchvote/parallel.hpp"

namespace patchvote {

namespace {

std::string resolve_path(const std::string& root, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute() || root.empty()) return rel;
  return (std::filesystem::path(root) / p).string();
}

}  // namespace

ImageCache::ImageCache(const DatasetManifest& m, const std::string& root_dir,
                       const GridSpec& grid, int input_size, bool keep_full,
                       const std::vector<char>* wanted, int threads)
    : grid_(grid), input_size_(input_size) {
  if (input_size < 8) throw std::invalid_argument("input size must be >= 8");
  if (wanted && wanted->size() != m.records.size()) {
    throw std::invalid_argument("cache mask does not match the manifest");
  }
  size_t n = m.records.size();
  labels_.resize(n);
  patches_.resize(n);
  central_.resize(n);
  if (keep_full) full_.resize(n);
  for (size_t r = 0; r < n; ++r) {
    labels_[r] = m.label_index(m.records[r].label);
  }
  parallel_for(n, threads, [&](size_t r) {
    if (wanted && !(*wanted)[r]) return;
    Raster img = decode_image(resolve_path(root_dir, m.records[r].path));
    PatchSet tiles = tile_grid(img, grid_);
    std::vector<Raster> sized;
    sized.reserve(tiles.patches.size());
    for (const Raster& p : tiles.patches) {
      sized.push_back(resize(p, input_size_, input_size_));
    }
    patches_[r] = std::move(sized);
    central_[r] = resize(
        central_crop(img, tiles.patch_width, tiles.patch_height),
        input_size_, input_size_);
    if (keep_full) full_[r] = std::move(img);
  });
}

const std::vector<Raster>& ImageCache::patches(size_t record) const {
  const std::vector<Raster>& p = patches_.at(record);
  if (p.empty()) throw std::logic_error("record was not materialized");
  return p;
}

const Raster& ImageCache::central_patch(size_t record) const {
  const Raster& r = central_.at(record);
  if (r.empty()) throw std::logic_error("record was not materialized");
  return r;
}

const Raster& ImageCache::full_image(size_t record) const {
  if (full_.empty()) throw std::logic_error("cache built without full images");
  const Raster& r = full_.at(record);
  if (r.empty()) throw std::logic_error("record was not materialized");
  return r;
}

void dihedral_to_chw(const Raster& patch, const DihedralOp& op, float* chw) {
  if (patch.width != patch.height) {
    throw std::invalid_argument("dihedral_to_chw needs a square patch");
  }
  int s = patch.width;
  size_t plane = size_t(s) * s;
  constexpr float kScale = 1.0f / 255.0f;
  int k = ((op.quarter_turns % 4) + 4) % 4;
  // Walk output pixels, undoing the mirrors and then the rotation to find the
  // source pixel; one pass, no intermediate rasters.
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      int xr = op.hflip ? s - 1 - x : x;
      int yr = op.vflip ? s - 1 - y : y;
      int bx, by;
      switch (k) {
        case 1:  bx = s - 1 - yr; by = xr;          break;
        case 2:  bx = s - 1 - xr; by = s - 1 - yr;  break;
        case 3:  bx = yr;         by = s - 1 - xr;  break;
        default: bx = xr;         by = yr;          break;
      }
      const uint8_t* px = patch.at(bx, by);
      size_t i = size_t(y) * s + x;
      chw[i] = px[0] * kScale;
      chw[plane + i] = px[1] * kScale;
      chw[2 * plane + i] = px[2] * kScale;
    }
  }
}

PatchTrainSource::PatchTrainSource(const ImageCache& cache,
                                   std::span<const size_t> train_records,
                                   AugmentKind kind, uint64_t seed)
    : cache_(&cache) {
  if (kind != AugmentKind::kNone && kind != AugmentKind::kTdli) {
    throw std::invalid_argument("patch source handles none/tdli only");
  }
  // Flatten (record, patch) into the concatenated patch sequence the
  // expansion plan indexes.
  std::vector<std::pair<uint32_t, uint16_t>> seq;
  size_t per_image = 0;
  for (size_t r : train_records) {
    size_t count = cache.patches(r).size();
    if (per_image == 0) per_image = count;
    if (count != per_image) throw std::logic_error("uneven patch counts");
    for (size_t p = 0; p < count; ++p) {
      seq.emplace_back(uint32_t(r), uint16_t(p));
    }
  }
  if (kind == AugmentKind::kNone) {
    items_.reserve(seq.size());
    for (auto [r, p] : seq) items_.push_back({r, p, DihedralOp{}});
  } else {
    Rng rng(seed);
    std::vector<DihedralOp> plan = tdli_plan(seq.size(), rng);
    items_.reserve(plan.size());
    for (const DihedralOp& op : plan) {
      auto [r, p] = seq[op.source];
      items_.push_back({r, p, op});
    }
  }
}

int PatchTrainSource::label(size_t index) const {
  return cache_->label(items_[index].record);
}

void PatchTrainSource::fill_input(size_t index, int /*epoch*/, int side,
                                  float* chw) const {
  const Item& it = items_[index];
  const Raster& patch = cache_->patches(it.record)[it.patch];
  if (patch.width != side || patch.height != side) {
    throw std::invalid_argument("cache patch size does not match the model");
  }
  dihedral_to_chw(patch, it.op, chw);
}

std::vector<size_t> PatchTrainSource::contributing_records() const {
  std::vector<char> seen(cache_->size(), 0);
  for (const Item& it : items_) seen[it.record] = 1;
  std::vector<size_t> out;
  for (size_t r = 0; r < seen.size(); ++r) {
    if (seen[r]) out.push_back(r);
  }
  return out;
}

VlTrainSource::VlTrainSource(const ImageCache& cache,
                             std::span<const size_t> train_records,
                             uint64_t seed) {
  Rng root(seed);
  for (size_t r : train_records) {
    // Stream keyed by the record's manifest index, so the expansion of one
    // image is independent of which fold or subset it lands in.
    Rng rng = root.stream("vl.image", r);
    std::vector<Raster> expanded = vl_protocol(cache.full_image(r), rng);
    for (Raster& img : expanded) {
      images_.push_back(
          resize(img, cache.input_size(), cache.input_size()));
      labels_.push_back(cache.label(r));
      records_.push_back(r);
    }
  }
}

void VlTrainSource::fill_input(size_t index, int /*epoch*/, int side,
                               float* chw) const {
  const Raster& img = images_[index];
  if (img.width != side || img.height != side) {
    throw std::invalid_argument("cached sample size does not match the model");
  }
  raster_to_chw(img, chw);
}

std::vector<size_t> VlTrainSource::contributing_records() const {
  std::vector<size_t> out(records_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TangTrainSource::TangTrainSource(const ImageCache& cache,
                                 std::span<const size_t> train_records,
                                 uint64_t seed)
    : cache_(&cache),
      records_(train_records.begin(), train_records.end()),
      seed_(seed) {
  for (size_t r : records_) cache.full_image(r);  // validate materialization
}

int TangTrainSource::label(size_t index) const {
  return cache_->label(records_[index]);
}

void TangTrainSource::fill_input(size_t index, int epoch, int side,
                                 float* chw) const {
  // Fresh draw per (epoch, position): pure function of the stream address,
  // so concurrent fills and epoch replays agree.
  Rng rng = Rng(seed_).stream(
      "tang.sample", uint64_t(epoch) * records_.size() + index);
  Raster sample = tang_protocol(cache_->full_image(records_[index]), rng);
  raster_to_chw(resize(sample, side, side), chw);
}

std::vector<size_t> TangTrainSource::contributing_records() const {
  std::vector<size_t> out(records_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace patchvote
