#include "txhist/learn/cross_validate.hpp"

#include <algorithm>
#include <numeric>

#include "txhist/learn/preprocess.hpp"
#include "txhist/parallel.hpp"

namespace txhist::learn {

EvaluationReport cross_validate(const Dataset& data, ModelKind kind, const ModelConfig& config,
                                const CvOptions& options) {
  std::vector<int> columns = options.mask.columns();
  if (columns.empty()) throw InputError("feature mask selects no columns");
  if (data.cols() != kNumFeatures) {
    if (options.mask != FeatureMask{}) {
      throw InputError("feature masks need the full " + std::to_string(kNumFeatures) +
                       "-column feature set, got " + std::to_string(data.cols()));
    }
    columns.resize(static_cast<std::size_t>(data.cols()));
    std::iota(columns.begin(), columns.end(), 0);
  }
  const Dataset masked = data.select_columns(columns);
  const FoldPlan plan = stratified_kfold(masked.labels, options.k, options.seed);

  struct FoldOutput {
    FoldResult result;
    ConfusionMatrix confusion;
    Eigen::VectorXd importance;
  };
  std::vector<FoldOutput> outputs(plan.k());
  // Inner training stays single-threaded when folds already run in parallel.
  const unsigned inner_threads = options.threads > 1 ? 1 : options.threads;

  parallel_for(plan.k(), options.threads, [&](std::size_t f) {
    Dataset train_set = masked.select_rows(plan.train_rows(f));
    const Dataset test_set = masked.select_rows(plan.folds[f]);
    if (options.weighted) train_set.weights = sample_weights(train_set.labels);
    const Model model = train(kind, train_set, config, derive_seed(options.seed, 4, f), inner_threads);
    const auto predictions = predict(model, test_set.features);

    FoldOutput& out = outputs[f];
    out.confusion = confusion_matrix(predictions, test_set.labels);
    const Evaluation e = evaluate(out.confusion);
    out.result = {f, train_set.labels.size(), test_set.labels.size(), e.micro_f1, e.macro_f1,
                  model.constant};
    if (is_tree_family(kind)) out.importance = importance_vector(model);
  });

  EvaluationReport report;
  report.kind = kind;
  report.mask = options.mask;
  report.k = plan.k();
  report.seed = options.seed;
  report.weighted = options.weighted;
  report.feature_names = masked.feature_names;

  ConfusionMatrix pooled = ConfusionMatrix::Zero();
  Eigen::VectorXd importance = Eigen::VectorXd::Zero(masked.cols());
  for (const auto& out : outputs) {
    report.folds.push_back(out.result);
    report.micro_f1_mean += out.result.micro_f1;
    report.macro_f1_mean += out.result.macro_f1;
    report.degenerate_folds += out.result.degenerate;
    pooled += out.confusion;
    if (out.importance.size()) importance += out.importance;
  }
  const auto k = static_cast<double>(plan.k());
  report.micro_f1_mean /= k;
  report.macro_f1_mean /= k;
  report.pooled = evaluate(pooled);

  if (is_tree_family(kind)) {
    importance /= k;
    for (Eigen::Index j = 0; j < importance.size(); ++j) {
      report.importance.push_back(
          {masked.feature_names[static_cast<std::size_t>(j)], static_cast<int>(j), importance[j]});
    }
    std::stable_sort(report.importance.begin(), report.importance.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });
  }
  return report;
}

}  // namespace txhist::learn
