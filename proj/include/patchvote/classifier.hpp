#pragma once

#include <memory>
#include <string>
#include <vector>

#include "patchvote/raster.hpp"

namespace patchvote {

// Softmax posterior over classes; length == num_classes.
using ProbabilityVector = std::vector<float>;

// Anything that maps a patch-sized raster to a class posterior. Inference is
// const and safe to call concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int input_size() const = 0;
  virtual int num_classes() const = 0;
  virtual ProbabilityVector predict_proba(const Raster& patch) const = 0;
};

// Adapter for externally supplied models: forwards predictions while
// enforcing the Classifier contract (length, nonnegativity, sum within 1e-6
// of 1) and, when given, the expected label count. Violations throw
// std::runtime_error.
class CheckedClassifier final : public Classifier {
 public:
  CheckedClassifier(std::shared_ptr<const Classifier> inner,
                    const std::vector<std::string>& expected_labels);
  explicit CheckedClassifier(std::shared_ptr<const Classifier> inner);

  int input_size() const override { return inner_->input_size(); }
  int num_classes() const override { return inner_->num_classes(); }
  ProbabilityVector predict_proba(const Raster& patch) const override;

 private:
  std::shared_ptr<const Classifier> inner_;
};

}  // namespace patchvote
