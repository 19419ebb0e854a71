#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchvote/augment.hpp"
#include "patchvote/cnn.hpp"
#include "patchvote/dataset.hpp"
#include "patchvote/pipeline.hpp"
#include "patchvote/raster.hpp"
#include "patchvote/voting.hpp"

namespace patchvote {

struct ExperimentConfig {
  std::string manifest_path;
  GridSpec grid{6, 8};
  AugmentKind augment = AugmentKind::kNone;
  InferMode mode = InferMode::kVote;
  int folds = 5;
  TrainConfig train;
  std::array<int, 3> widths = SmallCnn<float>::kDefaultWidths;
  uint64_t seed = 0;
  std::string output_dir;  // empty = keep results in memory only
  int threads = 1;         // preprocessing/inference only; training is serial

  void validate() const;  // throws std::invalid_argument
};

// key=value lines; blank lines and '#' comments ignored. Keys: manifest,
// grid, augment, mode, folds, epochs, batch_size, learning_rate, momentum,
// input_size, widths, seed, out, threads. manifest is required; unknown keys
// are an error.
ExperimentConfig read_experiment_config(const std::string& path);

// Deterministic key=value echo of the effective configuration, in the fixed
// key order above, one extra line naming classes with fewer records than
// folds ("none" when all classes fill every fold).
std::vector<std::string> config_echo(const ExperimentConfig& cfg,
                                     InferMode mode,
                                     const std::vector<std::string>& small_classes);

struct CvReport {
  InferMode mode = InferMode::kVote;
  std::vector<std::string> labels;      // canonical class order
  std::vector<double> fold_accuracy;    // index = fold id
  double mean_accuracy = 0.0;           // arithmetic mean over folds
  size_t total = 0;                     // evaluated images across folds
  size_t misclassified = 0;
  std::vector<std::vector<int>> confusion;  // [true class][predicted class]

  struct Row {
    std::string path;
    int fold = 0;
    int true_class = 0;
    int predicted = 0;
  };
  std::vector<Row> predictions;  // manifest order; every record once

  std::vector<std::string> config_lines;
  // Source-image paths whose samples actually entered training, per fold
  // (taken from the training source, not inferred from the split).
  std::vector<std::vector<std::string>> fold_train_paths;
};

// Per-fold model seed, derived so folds are independent streams of the run
// seed.
uint64_t fold_model_seed(uint64_t run_seed, int fold_id);

struct FoldTrainOutcome {
  SmallCnn<float> net;
  std::vector<size_t> train_records;  // manifest indices that contributed
  TrainResult history;
};

// Train the model for one fold: records outside `fold_id` feed the
// protocol's training source; the cache must cover them at
// cfg.train.input_size with the run grid.
FoldTrainOutcome train_fold(const DatasetManifest& m,
                            const FoldAssignment& folds, int fold_id,
                            const ExperimentConfig& cfg,
                            const ImageCache& cache);

// Full cross-validation, evaluating each trained fold in every requested
// mode (models are trained once and shared). With an output directory set,
// fold checkpoints and the fold assignment are written there.
std::vector<CvReport> run_cv_all_modes(const ExperimentConfig& cfg,
                                       std::span<const InferMode> modes);

// Single-mode convenience; writes report files into cfg.output_dir when set.
CvReport run_cv_experiment(const ExperimentConfig& cfg);

// Re-evaluate saved fold checkpoints (model_dir/fold_<f>.pvw, 0-based) over
// their holdouts; grid, input size, and protocol come from checkpoint
// metadata and must agree across folds.
CvReport evaluate_checkpoints(const std::string& manifest_path,
                              const std::string& folds_path,
                              const std::string& model_dir, InferMode mode,
                              int threads = 1);

// report.csv (one row per fold, 1-based to match the table layout, plus a
// mean row), confusion.csv, predictions.csv, config.txt.
void write_report(const CvReport& r, const std::string& dir);

// Throws unless the two canonical label sequences match exactly.
void ensure_labels_match(const std::vector<std::string>& model_labels,
                         const std::vector<std::string>& manifest_labels);

// Directory containing a manifest, for resolving its relative image paths.
std::string manifest_root(const std::string& manifest_path);

}  // namespace patchvote
