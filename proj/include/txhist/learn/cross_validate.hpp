#ifndef TXHIST_LEARN_CROSS_VALIDATE_HPP
#define TXHIST_LEARN_CROSS_VALIDATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "txhist/learn/dataset.hpp"
#include "txhist/learn/metrics.hpp"
#include "txhist/learn/models.hpp"

namespace txhist::learn {

struct CvOptions {
  std::size_t k = 10;
  std::uint64_t seed = 42;
  FeatureMask mask;
  /// Attach cost-sensitive class weights computed on each training fold.
  bool weighted = true;
  unsigned threads = 1;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double micro_f1 = 0;
  double macro_f1 = 0;
  bool degenerate = false;  // single-category training fold
};

struct EvaluationReport {
  ModelKind kind = ModelKind::GradientBoosting;
  FeatureMask mask;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  bool weighted = true;
  std::vector<std::string> feature_names;  // columns the models saw

  std::vector<FoldResult> folds;
  double micro_f1_mean = 0;
  double macro_f1_mean = 0;
  /// Summed over folds; per-class scores derived from it.
  Evaluation pooled;
  /// Mean fold importance, sorted; empty for linear models.
  std::vector<FeatureImportance> importance;
  std::size_t degenerate_folds = 0;

  /// Provenance, filled by the caller (CLI) before serialization.
  std::string config_json;
  std::string config_hash;
};

/// Stratified k-fold cross-validation. Folds train independently (in
/// parallel when threads > 1) and are reduced in fold order, so the report is
/// identical for every thread count.
EvaluationReport cross_validate(const Dataset& data, ModelKind kind, const ModelConfig& config,
                                const CvOptions& options);

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_CROSS_VALIDATE_HPP
