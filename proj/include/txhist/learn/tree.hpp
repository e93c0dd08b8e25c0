#ifndef TXHIST_LEARN_TREE_HPP
#define TXHIST_LEARN_TREE_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace txhist::learn {

/// Binary tree of axis-aligned splits: rows with x[feature] <= threshold go
/// left. Leaves hold `value` (class distribution or a single score).
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  /// Criterion improvement of this split (0 for leaves).
  double gain = 0;
  /// Total sample weight (classification) or hessian (boosting) at the node.
  double weight = 0;
  std::vector<double> value;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  const TreeNode& leaf(const Row& x) const {
    const TreeNode* node = &nodes.front();
    while (!node->is_leaf()) {
      node = &nodes[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left
                                                                                 : node->right)];
    }
    return *node;
  }

  int depth() const;
  std::size_t leaf_count() const;
  /// Sum of split gains per feature.
  Eigen::VectorXd split_gains(Eigen::Index num_features) const;
};

struct TreeParams {
  int max_depth = -1;  // negative: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  /// Features examined per split; 0 or >= column count means all.
  std::size_t max_features = 0;
};

/// Per-feature row orderings by ascending value (ties by row index). Built
/// once per training matrix and filtered per tree.
class SortedColumns {
 public:
  SortedColumns() = default;
  SortedColumns(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);

  /// Restriction to rows with keep[row] true, order preserved.
  SortedColumns filter(const std::vector<char>& keep) const;

  const std::vector<std::vector<std::size_t>>& columns() const { return columns_; }
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }

 private:
  std::vector<std::vector<std::size_t>> columns_;
};

/// Classification tree maximizing weighted information gain (entropy
/// reduction, in bits). `weights[row]` may include bootstrap multiplicity;
/// rows absent from `sorted` are ignored. Leaves hold normalized class
/// distributions. Impure nodes split whenever a valid split exists.
Tree grow_classification_tree(const Eigen::MatrixXd& x, std::span<const int> classes,
                              std::span<const double> weights, int num_classes,
                              const SortedColumns& sorted, const TreeParams& params,
                              std::mt19937_64* rng);

struct BoostingParams {
  TreeParams tree;
  double lambda = 1.0;
  double min_child_hessian = 1e-3;
  double learning_rate = 0.1;
};

/// Second-order regression tree on gradients/hessians. A split must improve
/// 0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] by a positive amount.
/// Leaves hold -learning_rate * G / (H + lambda).
Tree grow_gradient_tree(const Eigen::MatrixXd& x, std::span<const double> gradients,
                        std::span<const double> hessians, const SortedColumns& sorted,
                        const BoostingParams& params);

/// Replaces every node's gain and weight with the weighted class-entropy
/// reduction (bits) and total sample weight of the training rows routed
/// through it. Gives boosting trees the same importance measure as
/// classification trees.
void attribute_information_gain(Tree& tree, const Eigen::MatrixXd& x, std::span<const int> classes,
                                std::span<const double> weights, int num_classes);

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_TREE_HPP
