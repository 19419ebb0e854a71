#include "patchvote/voting.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "patchvote/parallel.hpp"

namespace patchvote {

InferMode parse_infer_mode(const std::string& name) {
  if (name == "vote") return InferMode::kVote;
  if (name == "central") return InferMode::kCentral;
  if (name == "mean") return InferMode::kMean;
  throw std::invalid_argument("unknown inference mode '" + name +
                              "' (expected vote|central|mean)");
}

std::string infer_mode_to_string(InferMode mode) {
  switch (mode) {
    case InferMode::kVote: return "vote";
    case InferMode::kCentral: return "central";
    case InferMode::kMean: return "mean";
  }
  throw std::logic_error("bad inference mode");
}

namespace {

int argmax_lowest(const ProbabilityVector& p) {
  int best = 0;
  for (int c = 1; c < int(p.size()); ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

void check_nonempty(const ProbabilityMatrix& pm) {
  if (pm.entries.empty() || pm.num_classes < 1)
    throw std::invalid_argument("empty probability matrix");
  for (const ProbabilityVector& p : pm.entries)
    if (int(p.size()) != pm.num_classes)
      throw std::invalid_argument("probability matrix has ragged entries");
}

// Tally votes and probability mass; shared by both aggregation rules.
Prediction tally(const ProbabilityMatrix& pm) {
  Prediction out;
  out.vote_tally.assign(pm.num_classes, 0);
  out.summed_probs.assign(pm.num_classes, 0.0);
  for (const ProbabilityVector& p : pm.entries) {
    out.vote_tally[argmax_lowest(p)] += 1;
    for (int c = 0; c < pm.num_classes; ++c) out.summed_probs[c] += p[c];
  }
  out.per_patch = pm;
  return out;
}

}  // namespace

ProbabilityMatrix evaluate_patches(const Classifier& m, const PatchSet& ps,
                                   int threads) {
  if (ps.patches.empty()) throw std::invalid_argument("empty patch set");
  ProbabilityMatrix pm;
  pm.grid = ps.grid;
  pm.num_classes = m.num_classes();
  pm.entries.resize(ps.patches.size());
  int side = m.input_size();
  parallel_for(ps.patches.size(), threads, [&](size_t i) {
    pm.entries[i] = m.predict_proba(resize(ps.patches[i], side, side));
  });
  return pm;
}

Prediction majority_vote(const ProbabilityMatrix& pm) {
  check_nonempty(pm);
  Prediction out = tally(pm);
  out.mode = InferMode::kVote;
  int best = 0;
  for (int c = 1; c < pm.num_classes; ++c) {
    if (out.vote_tally[c] > out.vote_tally[best] ||
        (out.vote_tally[c] == out.vote_tally[best] &&
         out.summed_probs[c] > out.summed_probs[best]))
      best = c;
  }
  out.predicted_class = best;
  return out;
}

Prediction mean_aggregate(const ProbabilityMatrix& pm) {
  check_nonempty(pm);
  Prediction out = tally(pm);
  out.mode = InferMode::kMean;
  // The mean is the summed vector scaled by 1/n; argmax is scale-invariant.
  int best = 0;
  for (int c = 1; c < pm.num_classes; ++c)
    if (out.summed_probs[c] > out.summed_probs[best]) best = c;
  out.predicted_class = best;
  return out;
}

Prediction infer_image(const Classifier& m, const Raster& r,
                       const GridSpec& grid, InferMode mode, int threads) {
  if (mode == InferMode::kCentral) {
    int pw = r.width / grid.cols;
    int ph = r.height / grid.rows;
    if (pw < 1 || ph < 1)
      throw std::invalid_argument("grid " + grid_to_string(grid) +
                                  " larger than raster");
    Raster cropped = central_crop(r, pw, ph);
    int side = m.input_size();
    ProbabilityMatrix pm;
    pm.grid = {1, 1};
    pm.num_classes = m.num_classes();
    pm.entries.push_back(m.predict_proba(resize(cropped, side, side)));
    Prediction out = tally(pm);
    out.mode = InferMode::kCentral;
    out.predicted_class = argmax_lowest(pm.entries[0]);
    return out;
  }
  PatchSet ps = tile_grid(r, grid);
  ProbabilityMatrix pm = evaluate_patches(m, ps, threads);
  return mode == InferMode::kVote ? majority_vote(pm) : mean_aggregate(pm);
}

void write_prediction_record(std::ostream& out, const std::string& image_path,
                             const Prediction& p,
                             const std::vector<std::string>& labels) {
  out << "image,mode,predicted_label\n";
  out << image_path << ',' << infer_mode_to_string(p.mode) << ','
      << labels[size_t(p.predicted_class)] << '\n';
  out << "class,votes,summed_prob\n";
  char buf[64];
  for (size_t c = 0; c < labels.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "%.6f", p.summed_probs[c]);
    out << labels[c] << ',' << p.vote_tally[c] << ',' << buf << '\n';
  }
  out << "argmax_grid\n";
  const ProbabilityMatrix& pm = p.per_patch;
  for (int i = 0; i < pm.grid.rows; ++i) {
    for (int j = 0; j < pm.grid.cols; ++j) {
      if (j) out << ',';
      out << argmax_lowest(pm.at(i, j));
    }
    out << '\n';
  }
}

}  // namespace patchvote
