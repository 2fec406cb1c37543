#pragma once

#include "ddl/types.hpp"

namespace ddl::classify {

struct EvalReport {
  double accuracy = 0.0;
  Index num_test = 0;
  Index num_errors = 0;
  double elapsed_seconds = 0.0;
};

// Label of the nearest training column (squared Euclidean distance) for
// every test column. Distances equal to within 1e-12 relative count as ties
// and go to the lowest training index.
LabelVector knn1_classify(const SampleMatrix& train_features, const LabelVector& train_labels,
                          const SampleMatrix& test_features);

EvalReport accuracy(const LabelVector& predicted, const LabelVector& truth);

// knn1_classify followed by accuracy, with the wall-clock time recorded.
EvalReport evaluate_knn1(const SampleMatrix& train_features, const LabelVector& train_labels,
                         const SampleMatrix& test_features, const LabelVector& test_labels);

}  // namespace ddl::classify
