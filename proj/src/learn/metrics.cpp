#include "txhist/learn/metrics.hpp"

namespace txhist::learn {

ConfusionMatrix confusion_matrix(std::span<const Category> predictions,
                                 std::span<const Category> truths) {
  if (predictions.size() != truths.size()) {
    throw InputError("evaluate: prediction and truth lengths differ");
  }
  ConfusionMatrix m = ConfusionMatrix::Zero();
  for (std::size_t i = 0; i < truths.size(); ++i) ++m(ordinal(truths[i]), ordinal(predictions[i]));
  return m;
}

Evaluation evaluate(const ConfusionMatrix& confusion) {
  Evaluation e;
  e.confusion = confusion;
  const std::int64_t total = confusion.sum();
  if (total == 0) throw InputError("evaluate: no samples");

  double f1_sum = 0;
  for (int c = 0; c < kNumCategories; ++c) {
    ClassScore& s = e.per_class[c];
    const std::int64_t tp = confusion(c, c);
    s.support = confusion.row(c).sum();
    s.predicted = confusion.col(c).sum();
    if (s.predicted > 0) s.precision = static_cast<double>(tp) / static_cast<double>(s.predicted);
    if (s.support > 0) s.recall = static_cast<double>(tp) / static_cast<double>(s.support);
    if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
    if (s.support > 0 || s.predicted > 0) {
      ++e.classes_scored;
      f1_sum += s.f1;
    }
  }
  e.micro_f1 = static_cast<double>(confusion.trace()) / static_cast<double>(total);
  e.macro_f1 = f1_sum / e.classes_scored;
  return e;
}

Evaluation evaluate(std::span<const Category> predictions, std::span<const Category> truths) {
  if (truths.empty()) throw InputError("evaluate: empty vectors");
  return evaluate(confusion_matrix(predictions, truths));
}

NormalizedConfusion row_normalized(const ConfusionMatrix& confusion) {
  NormalizedConfusion out = NormalizedConfusion::Zero();
  for (int r = 0; r < kNumCategories; ++r) {
    const std::int64_t sum = confusion.row(r).sum();
    if (sum > 0) out.row(r) = confusion.row(r).cast<double>() / static_cast<double>(sum);
  }
  return out;
}

}  // namespace txhist::learn
