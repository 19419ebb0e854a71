#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "patchvote/classifier.hpp"
#include "patchvote/raster.hpp"

namespace patchvote {

// Per-patch posteriors P_{i,j}, row-major over the grid.
struct ProbabilityMatrix {
  GridSpec grid;
  int num_classes = 0;
  std::vector<ProbabilityVector> entries;  // grid.rows * grid.cols

  const ProbabilityVector& at(int i, int j) const {
    return entries[size_t(i) * grid.cols + j];
  }
};

enum class InferMode { kVote, kCentral, kMean };

InferMode parse_infer_mode(const std::string& name);
std::string infer_mode_to_string(InferMode mode);

struct Prediction {
  int predicted_class = -1;
  InferMode mode = InferMode::kVote;
  std::vector<int> vote_tally;       // per-patch argmax votes per class
  std::vector<double> summed_probs;  // per-class probability mass
  ProbabilityMatrix per_patch;
};

// Entry (i,j) = predict_proba(m, resize(patch(i,j))); order-independent, so
// patches may be evaluated in parallel.
ProbabilityMatrix evaluate_patches(const Classifier& m, const PatchSet& ps,
                                   int threads = 1);

// Each patch votes its argmax class (ties toward the lowest index); the
// winner has the most votes, ties broken by larger summed probability, then
// by lowest class index.
Prediction majority_vote(const ProbabilityMatrix& pm);

// Argmax of the entrywise mean vector, ties toward the lowest index.
Prediction mean_aggregate(const ProbabilityMatrix& pm);

// vote/mean: tile + evaluate + aggregate. central: central_crop to the patch
// size the grid implies, one evaluation.
Prediction infer_image(const Classifier& m, const Raster& r,
                       const GridSpec& grid, InferMode mode, int threads = 1);

// Report record: image path, mode, predicted label, per-class tally, and the
// per-patch argmax grid, as small CSV sections.
void write_prediction_record(std::ostream& out, const std::string& image_path,
                             const Prediction& p,
                             const std::vector<std::string>& labels);

}  // namespace patchvote
