#ifndef TXHIST_LEARN_MODELS_HPP
#define TXHIST_LEARN_MODELS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "txhist/learn/dataset.hpp"
#include "txhist/learn/preprocess.hpp"
#include "txhist/learn/tree.hpp"

namespace txhist::learn {

enum class ModelKind { LogisticRegression, Perceptron, DecisionTree, RandomForest, GradientBoosting };

std::string_view model_kind_name(ModelKind kind);
/// Accepts the canonical names (logistic, perceptron, tree, forest, gbt).
ModelKind parse_model_kind(std::string_view name);
bool is_tree_family(ModelKind kind);

struct LogisticConfig {
  double learning_rate = 0.5;
  int max_iterations = 5000;
  double tolerance = 1e-6;  // stop when the gradient norm falls below
  double l2 = 0.0;
};

struct PerceptronConfig {
  int epochs = 100;
  double learning_rate = 1.0;
};

struct DecisionTreeConfig {
  int max_depth = -1;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
};

struct ForestConfig {
  int trees = 300;
  int max_depth = -1;
  std::size_t max_features = 8;  // 0: floor(sqrt(columns))
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
};

struct BoostingConfig {
  int rounds = 200;
  int max_depth = 6;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double min_child_hessian = 1e-3;
  std::size_t min_samples_leaf = 1;
};

/// Hyperparameters for every model kind. Defaults mirror
/// config/classifiers.json.
struct ModelConfig {
  LogisticConfig logistic;
  PerceptronConfig perceptron;
  DecisionTreeConfig tree;
  ForestConfig forest;
  BoostingConfig boosting;
};

/// A trained classifier. Class scores are computed over `classes` (the
/// categories seen in training, ascending); argmax ties go to the lowest
/// ordinal.
struct Model {
  ModelKind kind = ModelKind::DecisionTree;
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::vector<Category> classes;
  /// Training saw a single category: predicts it everywhere.
  bool constant = false;

  std::optional<MaxAbsScaler> scaler;  // linear models only
  Eigen::MatrixXd coefficients;        // columns x classes
  Eigen::RowVectorXd intercept;        // classes

  std::vector<Tree> trees;        // tree: 1; forest: one per tree; gbt: rounds * classes
  Eigen::RowVectorXd base_score;  // gbt initial log-priors

  std::size_t num_classes() const { return classes.size(); }
};

/// Trains on `data` (weighted when `data.weights` is set). Deterministic given
/// the seed; `threads` parallelizes forest trees and per-class boosting trees
/// without changing the result.
Model train(ModelKind kind, const Dataset& data, const ModelConfig& config, std::uint64_t seed,
            unsigned threads = 1);

/// rows x num_classes score matrix. Throws InputError on a column mismatch.
Eigen::MatrixXd class_scores(const Model& model, const Eigen::MatrixXd& x);

std::vector<Category> predict(const Model& model, const Eigen::MatrixXd& x);

struct FeatureImportance {
  std::string name;
  int column = 0;
  double score = 0;
};

/// Information-gain importance: per feature, the weighted class-entropy
/// reduction of the splits using it, normalized by each tree's root weight
/// and averaged over trees. Boosting trees split on Newton gain but are
/// scored the same way.
/// Sorted descending, ties by column. Throws InputError for linear models.
std::vector<FeatureImportance> feature_importance(const Model& model);

/// Unsorted per-column importance vector (same scores as feature_importance).
Eigen::VectorXd importance_vector(const Model& model);

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_MODELS_HPP
