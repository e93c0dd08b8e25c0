#ifndef TXHIST_LEARN_PREPROCESS_HPP
#define TXHIST_LEARN_PREPROCESS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "txhist/core.hpp"

namespace txhist::learn {

/// Exact per-category weight N / (C * n_c) as a fraction; zero
/// denominator marks categories absent from the labels.
struct WeightFraction {
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
};

/// Cost-sensitive weights w = k / p with k = 1/C and p = n_c / N, where C
/// counts the categories present. Throws InputError on empty labels.
std::array<WeightFraction, kNumCategories> sample_weight_fractions(std::span<const Category> labels);

Eigen::VectorXd sample_weights(std::span<const Category> labels);

/// Per-column division by the largest absolute training value. Zero columns
/// pass through; test values outside [-1, 1] are kept as they are.
struct MaxAbsScaler {
  Eigen::RowVectorXd scale;

  static MaxAbsScaler fit(const Eigen::MatrixXd& train);

  template <typename Derived>
  Eigen::MatrixXd transform(const Eigen::MatrixBase<Derived>& x) const {
    return x.array().rowwise() / scale.array();
  }
};

/// k disjoint folds covering every row.
struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  std::size_t k() const { return folds.size(); }
  /// Complement of fold `f`, ascending.
  std::vector<std::size_t> train_rows(std::size_t f) const;
};

/// Stratified assignment: within each category, a seeded shuffle is dealt
/// round-robin over the folds, continuing the deal position across
/// categories. Per-fold category counts are floor or ceil of n_c / k.
/// Throws InputError when k < 2 or k > N.
FoldPlan stratified_kfold(std::span<const Category> labels, std::size_t k, std::uint64_t seed);

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_PREPROCESS_HPP
