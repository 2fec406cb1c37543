#include "ddl/classify.hpp"
#include "ddl/error.hpp"

#include "oracles.hpp"
#include "test_data.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ddl {
namespace {

using classify::knn1_classify;
using testing::random_matrix;

LabelVector random_labels(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  LabelVector labels(n);
  for (auto& l : labels) l = pick(rng);
  return labels;
}

TEST(Knn1, ExactMatchWins) {
  const Matrix train = random_matrix(5, 30, 1);
  const LabelVector labels = random_labels(30, 4, 2);
  const auto predicted = knn1_classify(train, labels, train);
  EXPECT_EQ(predicted, labels);
}

TEST(Knn1, TiesGoToLowerIndex) {
  Matrix train(2, 3);
  train << 1.0, -1.0, 0.0,
           0.0, 0.0, 1.0;
  const Matrix origin = Matrix::Zero(2, 1);
  EXPECT_EQ(knn1_classify(train, {7, 3, 9}, origin), LabelVector{7});
  EXPECT_EQ(knn1_classify(train, {3, 7, 9}, origin), LabelVector{3});

  // Duplicated training columns with different labels.
  Matrix dup(2, 2);
  dup << 0.5, 0.5,
         0.25, 0.25;
  Matrix q(2, 1);
  q << 0.1, 0.9;
  EXPECT_EQ(knn1_classify(dup, {4, 1}, q), LabelVector{4});
}

TEST(Knn1, LeaveOneOutMatchesBruteForce) {
  // Three classes of three points each.
  Matrix points(2, 9);
  points << 0.0, 0.2, 0.1, 5.0, 5.3, 4.9, 0.0, 0.4, -0.3,
            0.0, 0.1, 0.3, 5.0, 4.8, 5.2, 6.0, 5.7, 6.2;
  const LabelVector labels = {0, 0, 0, 1, 1, 1, 2, 2, 2};
  for (Index held = 0; held < 9; ++held) {
    Matrix train(2, 8);
    LabelVector train_labels;
    for (Index j = 0, k = 0; j < 9; ++j) {
      if (j == held) continue;
      train.col(k++) = points.col(j);
      train_labels.push_back(labels[static_cast<std::size_t>(j)]);
    }
    const Matrix query = points.col(held);
    const auto got = knn1_classify(train, train_labels, query);
    EXPECT_EQ(got, oracle::nearest_neighbour(train, train_labels, query)) << "held " << held;
    EXPECT_EQ(got[0], labels[static_cast<std::size_t>(held)]) << "held " << held;
  }
}

TEST(Knn1, AgreesWithBruteForceOnRandomData) {
  const Matrix train = random_matrix(20, 400, 3);
  const Matrix test = random_matrix(20, 300, 4);
  const LabelVector labels = random_labels(400, 10, 5);
  EXPECT_EQ(knn1_classify(train, labels, test), oracle::nearest_neighbour(train, labels, test));
}

TEST(Knn1, AgreesWithBruteForceOnNearTies) {
  // Offsets far below the cancellation error of the Gram-trick distances
  // but well above the tie tolerance stress the screening step.
  Matrix train = random_matrix(30, 200, 6, 100.0, 101.0);
  for (Index j = 1; j < train.cols(); j += 2) train.col(j) = train.col(j - 1).array() + 1e-7;
  const Matrix test = random_matrix(30, 150, 7, 100.0, 101.0);
  const LabelVector labels = random_labels(200, 5, 8);
  EXPECT_EQ(knn1_classify(train, labels, test), oracle::nearest_neighbour(train, labels, test));
}

TEST(Knn1, SubToleranceCopiesTieToLowerIndex) {
  Matrix train = random_matrix(30, 40, 23, 100.0, 101.0);
  for (Index j = 1; j < train.cols(); j += 2) train.col(j) = train.col(j - 1).array() + 1e-13;
  LabelVector labels(40);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i);
  const auto predicted = knn1_classify(train, labels, random_matrix(30, 100, 24, 100.0, 101.0));
  for (const int p : predicted) EXPECT_EQ(p % 2, 0) << p;
}

TEST(Knn1, LabelPermutationCommutes) {
  const Matrix train = random_matrix(6, 80, 9);
  const Matrix test = random_matrix(6, 50, 10);
  const LabelVector labels = random_labels(80, 5, 11);
  const std::vector<int> perm = {3, 0, 4, 1, 2};
  LabelVector relabelled;
  for (const int l : labels) relabelled.push_back(perm[static_cast<std::size_t>(l)]);
  const auto base = knn1_classify(train, labels, test);
  const auto mapped = knn1_classify(train, relabelled, test);
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(mapped[i], perm[static_cast<std::size_t>(base[i])]);
}

TEST(Knn1, OrthogonalTransformInvariance) {
  const Matrix train = random_matrix(8, 120, 12);
  const Matrix test = random_matrix(8, 60, 13);
  const LabelVector labels = random_labels(120, 10, 14);
  const Matrix q = testing::random_orthogonal(8, 15);
  EXPECT_EQ(knn1_classify(train, labels, test), knn1_classify(q * train, labels, q * test));
}

TEST(Knn1, Deterministic) {
  const Matrix train = random_matrix(10, 500, 16);
  const Matrix test = random_matrix(10, 400, 17);
  const LabelVector labels = random_labels(500, 10, 18);
  EXPECT_EQ(knn1_classify(train, labels, test), knn1_classify(train, labels, test));
}

TEST(Knn1, RejectsBadInput) {
  const Matrix train = random_matrix(4, 5, 19);
  EXPECT_THROW(knn1_classify(Matrix(4, 0), {}, train), DegenerateDataError);
  EXPECT_THROW(knn1_classify(train, {1, 2}, train), DimensionError);
  EXPECT_THROW(knn1_classify(train, {0, 0, 0, 0, 0}, random_matrix(3, 2, 20)), DimensionError);
  EXPECT_TRUE(knn1_classify(train, {0, 0, 0, 0, 0}, Matrix(4, 0)).empty());
}

TEST(Accuracy, CountsErrors) {
  auto r = classify::accuracy({1, 2, 3, 4}, {1, 2, 3, 4});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.num_errors, 0);
  r = classify::accuracy({0, 0}, {1, 1});
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.num_errors, 2);
  LabelVector truth(100, 1);
  LabelVector pred = truth;
  pred[5] = pred[17] = pred[99] = 0;
  r = classify::accuracy(pred, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.97);
  EXPECT_EQ(r.num_errors, 3);
  EXPECT_EQ(r.num_test, 100);
  EXPECT_THROW(classify::accuracy({1}, {1, 2}), DimensionError);
}

TEST(Evaluate, ReportsAccuracyAndTime) {
  const Matrix train = random_matrix(5, 40, 21);
  const LabelVector labels = random_labels(40, 3, 22);
  const auto report = classify::evaluate_knn1(train, labels, train, labels);
  EXPECT_EQ(report.accuracy, 1.0);
  EXPECT_EQ(report.num_test, 40);
  EXPECT_GE(report.elapsed_seconds, 0.0);
  EXPECT_THROW(classify::evaluate_knn1(train, labels, train, {1}), DimensionError);
}

}  // namespace
}  // namespace ddl
