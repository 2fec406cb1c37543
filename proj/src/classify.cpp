#include "ddl/classify.hpp"

#include "ddl/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace ddl::classify {
namespace {

constexpr double kTieTolerance = 1e-12;
constexpr Index kTestBlock = 128;

}  // namespace

LabelVector knn1_classify(const SampleMatrix& train_features, const LabelVector& train_labels,
                          const SampleMatrix& test_features) {
  if (train_features.cols() == 0) throw DegenerateDataError("1-NN needs at least one training sample");
  if (static_cast<Index>(train_labels.size()) != train_features.cols()) {
    throw DimensionError("training features have " + std::to_string(train_features.cols()) +
                         " columns but " + std::to_string(train_labels.size()) + " labels");
  }
  if (train_features.rows() != test_features.rows()) {
    throw DimensionError("training features have " + std::to_string(train_features.rows()) +
                         " dimensions, test features " + std::to_string(test_features.rows()));
  }

  const Index n_train = train_features.cols();
  const Vector train_sq = train_features.colwise().squaredNorm().transpose();
  const double train_sq_max = train_sq.maxCoeff();
  const double eps = std::numeric_limits<double>::epsilon();
  const double dim_factor = 4.0 * static_cast<double>(train_features.rows() + 4) * eps;

  LabelVector predicted(static_cast<std::size_t>(test_features.cols()));
  std::vector<Index> candidates;
  Vector exact(n_train);

  // ||a - b||^2 = ||a||^2 + ||b||^2 - 2 a.b screens candidates through one
  // matrix product per block; the winner is then picked on exact distances.
  for (Index start = 0; start < test_features.cols(); start += kTestBlock) {
    const Index width = std::min(kTestBlock, test_features.cols() - start);
    const auto block = test_features.middleCols(start, width);
    const Matrix cross = train_features.transpose() * block;

    for (Index j = 0; j < width; ++j) {
      const auto query = block.col(j);
      const double query_sq = query.squaredNorm();
      Vector approx = train_sq - 2.0 * cross.col(j);
      approx.array() += query_sq;
      const double approx_min = approx.minCoeff();
      const double slack = dim_factor * (train_sq_max + query_sq) + 4.0 * kTieTolerance * std::abs(approx_min);

      candidates.clear();
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < n_train; ++i) {
        if (approx(i) <= approx_min + slack) {
          candidates.push_back(i);
          exact(i) = (train_features.col(i) - query).squaredNorm();
          best = std::min(best, exact(i));
        }
      }
      const double tie_limit = best + kTieTolerance * best;
      for (const Index i : candidates) {
        if (exact(i) <= tie_limit) {
          predicted[static_cast<std::size_t>(start + j)] = train_labels[static_cast<std::size_t>(i)];
          break;
        }
      }
    }
  }
  return predicted;
}

EvalReport accuracy(const LabelVector& predicted, const LabelVector& truth) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("prediction count " + std::to_string(predicted.size()) +
                         " does not match label count " + std::to_string(truth.size()));
  }
  EvalReport report;
  report.num_test = static_cast<Index>(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] != truth[i]) ++report.num_errors;
  }
  report.accuracy = report.num_test == 0
                        ? 0.0
                        : static_cast<double>(report.num_test - report.num_errors) /
                              static_cast<double>(report.num_test);
  return report;
}

EvalReport evaluate_knn1(const SampleMatrix& train_features, const LabelVector& train_labels,
                         const SampleMatrix& test_features, const LabelVector& test_labels) {
  if (static_cast<Index>(test_labels.size()) != test_features.cols()) {
    throw DimensionError("test features have " + std::to_string(test_features.cols()) +
                         " columns but " + std::to_string(test_labels.size()) + " labels");
  }
  const auto start = std::chrono::steady_clock::now();
  const LabelVector predicted = knn1_classify(train_features, train_labels, test_features);
  EvalReport report = accuracy(predicted, test_labels);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  report.elapsed_seconds = elapsed.count();
  return report;
}

}  // namespace ddl::classify
