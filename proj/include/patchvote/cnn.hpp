#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchvote/classifier.hpp"
#include "patchvote/raster.hpp"

namespace patchvote {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int input_size = 64;
  uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument on bad fields
};

// Lazily materialized training-set view. `epoch` is passed through so a
// source may resample its augmentations each epoch; size() and labels must
// stay fixed. Implementations must be safe for concurrent fill_input calls.
class TrainingSource {
 public:
  virtual ~TrainingSource() = default;
  virtual size_t size() const = 0;
  virtual int label(size_t index) const = 0;
  // Write sample `index` as channel-major unit-interval floats
  // (3 * side * side values).
  virtual void fill_input(size_t index, int epoch, int side,
                          float* chw) const = 0;
};

// Plain in-memory source over (Raster, label) pairs; rasters are resized to
// the requested side when materialized.
class RasterSource final : public TrainingSource {
 public:
  RasterSource(std::span<const Raster> images, std::span<const int> labels);

  size_t size() const override { return images_.size(); }
  int label(size_t index) const override { return labels_[index]; }
  void fill_input(size_t index, int epoch, int side,
                  float* chw) const override;

 private:
  std::vector<Raster> images_;
  std::vector<int> labels_;
};

// Channel-major unit-interval conversion (value / 255).
void raster_to_chw(const Raster& r, float* chw);

// Three 3x3 same-padded conv blocks (ReLU, 2x2 max-pool) with configurable
// channel widths, global average pooling, and one fully-connected layer to
// num_classes logits. Forward accepts any square input of side >= 8 thanks
// to the global pooling; parameter count depends only on the widths and the
// class count. All parameters live in one flat buffer.
template <typename T>
class SmallCnn {
 public:
  static constexpr std::array<int, 3> kDefaultWidths{16, 32, 64};

  SmallCnn() = default;
  // Weights drawn fan-in-scaled uniform from the seeded generator; conv
  // biases +1 (keeps newborn filters alive on low-contrast unit-interval
  // inputs), classifier bias 0.
  SmallCnn(int num_classes, int input_size, uint64_t seed,
           const std::array<int, 3>& conv_widths = kDefaultWidths);

  int num_classes() const { return num_classes_; }
  int input_size() const { return input_size_; }
  const std::array<int, 3>& conv_widths() const { return widths_; }
  size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }

  struct NamedTensor {
    std::string name;
    std::vector<uint32_t> dims;
    size_t offset = 0;  // into parameters()
    size_t count = 0;
  };
  std::vector<NamedTensor> tensors() const;

  // Logits for one channel-major sample of the given side (square, >= 8).
  std::vector<T> forward_logits(const T* chw, int side) const;

  // Softmax posterior in native precision; patch side must equal input_size.
  std::vector<T> predict_scores(const Raster& patch) const;
  ProbabilityVector predict_proba(const Raster& patch) const;

  // Mean cross-entropy over the batch. When grad != nullptr (length
  // parameter_count(), zero-initialized by this call) the mean gradient is
  // written there.
  T batch_loss(std::span<const T* const> inputs, int side,
               std::span<const int> labels, T* grad) const;

 private:
  int num_classes_ = 0;
  int input_size_ = 0;
  std::array<int, 3> widths_ = kDefaultWidths;
  std::vector<T> params_;
};

extern template class SmallCnn<float>;
extern template class SmallCnn<double>;

// Classifier facade over a trained float net.
class CnnClassifier final : public Classifier {
 public:
  explicit CnnClassifier(SmallCnn<float> net) : net_(std::move(net)) {}

  int input_size() const override { return net_.input_size(); }
  int num_classes() const override { return net_.num_classes(); }
  ProbabilityVector predict_proba(const Raster& patch) const override {
    return net_.predict_proba(patch);
  }
  const SmallCnn<float>& net() const { return net_; }

 private:
  SmallCnn<float> net_;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // running mean training loss per epoch
};

// Mini-batch SGD with momentum on softmax cross-entropy for exactly
// cfg.epochs epochs; sample order reshuffled per epoch from the seeded
// generator; the last-epoch weights are kept (no early stopping or
// best-epoch selection). Single-threaded and bitwise reproducible; run
// independent folds concurrently for parallel speedup.
TrainResult train(SmallCnn<float>& model, const TrainingSource& data,
                  const TrainConfig& cfg);
TrainResult train(SmallCnn<float>& model, std::span<const Raster> images,
                  std::span<const int> labels, const TrainConfig& cfg);

// Mean cross-entropy of the model over a source (no weight updates).
double dataset_loss(const SmallCnn<float>& model, const TrainingSource& data,
                    int epoch = 0);

}  // namespace patchvote
