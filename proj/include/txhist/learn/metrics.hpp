#ifndef TXHIST_LEARN_METRICS_HPP
#define TXHIST_LEARN_METRICS_HPP

#include <array>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "txhist/core.hpp"

namespace txhist::learn {

/// Rows are true categories, columns predicted ones, both in ordinal order.
using ConfusionMatrix = Eigen::Matrix<std::int64_t, kNumCategories, kNumCategories>;
using NormalizedConfusion = Eigen::Matrix<double, kNumCategories, kNumCategories>;

struct ClassScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;    // true count
  std::int64_t predicted = 0;  // predicted count
};

struct Evaluation {
  double micro_f1 = 0;
  double macro_f1 = 0;
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  std::array<ClassScore, kNumCategories> per_class{};
  /// Classes that appear in truth or prediction; these enter macro-F1.
  int classes_scored = 0;
};

ConfusionMatrix confusion_matrix(std::span<const Category> predictions,
                                 std::span<const Category> truths);

/// Micro-F1 equals accuracy for single-label problems. Macro-F1 averages
/// per-class F1 over classes present in truth or prediction; a class that is
/// predicted but never true scores F1 = 0.
Evaluation evaluate(const ConfusionMatrix& confusion);

/// Throws InputError on empty or mismatched vectors.
Evaluation evaluate(std::span<const Category> predictions, std::span<const Category> truths);

/// Each row with any true samples divided by its sum; empty rows stay zero.
NormalizedConfusion row_normalized(const ConfusionMatrix& confusion);

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_METRICS_HPP
