#ifndef TXHIST_LEARN_DATASET_HPP
#define TXHIST_LEARN_DATASET_HPP

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "txhist/core.hpp"

namespace txhist::learn {

/// Labeled feature matrix. Rows are subjects; columns follow `feature_names`.
/// `weights` is either empty (unweighted) or one positive value per row.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<Category> labels;
  std::vector<std::string> subjects;
  std::vector<std::string> feature_names;
  Eigen::VectorXd weights;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  bool weighted() const { return weights.size() > 0; }

  /// Throws ContractViolation on inconsistent sizes or non-finite entries.
  void validate() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset select_columns(std::span<const int> columns) const;
};

/// Which feature groups a model sees.
struct FeatureMask {
  bool basic = true;
  bool extra = true;
  bool moments = true;

  /// Canonical column indices enabled by the mask, ascending.
  std::vector<int> columns() const;
  /// "all", or a '+'-joined subset such as "basic+moments".
  std::string to_string() const;
  /// Accepts "all" or a comma/'+'-separated list of basic, extra, moments.
  static FeatureMask parse(std::string_view text);

  bool operator==(const FeatureMask&) const = default;
};

/// Full 64-column dataset from canonical feature vectors.
Dataset make_dataset(std::vector<std::string> subjects, std::vector<Category> labels,
                     std::span<const FeatureVector> features);

/// Reads the feature CSV written by `write_feature_csv`. Lines starting with
/// '#' are metadata and skipped.
Dataset read_feature_csv(std::istream& in);

/// Header `subject,category,<feature names>`; numbers in shortest
/// round-trip form. `comment`, when non-empty, is written first as `# ...`.
void write_feature_csv(std::ostream& out, const Dataset& data, const std::string& comment = {});

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_DATASET_HPP
