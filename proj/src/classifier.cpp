#include "patchvote/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace patchvote {

CheckedClassifier::CheckedClassifier(std::shared_ptr<const Classifier> inner,
                                     const std::vector<std::string>& expected_labels)
    : inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("null classifier");
  if (inner_->num_classes() != int(expected_labels.size()))
    throw std::runtime_error(
        "classifier has " + std::to_string(inner_->num_classes()) +
        " classes but the label set has " +
        std::to_string(expected_labels.size()));
}

CheckedClassifier::CheckedClassifier(std::shared_ptr<const Classifier> inner)
    : inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("null classifier");
}

ProbabilityVector CheckedClassifier::predict_proba(const Raster& patch) const {
  ProbabilityVector p = inner_->predict_proba(patch);
  if (int(p.size()) != inner_->num_classes())
    throw std::runtime_error("classifier returned " +
                             std::to_string(p.size()) + " probabilities for " +
                             std::to_string(inner_->num_classes()) + " classes");
  double sum = 0.0;
  for (float v : p) {
    if (!(v >= 0.0f))
      throw std::runtime_error("classifier returned a negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::runtime_error("classifier output sums to " +
                             std::to_string(sum) + ", expected 1");
  return p;
}

}  // namespace patchvote
