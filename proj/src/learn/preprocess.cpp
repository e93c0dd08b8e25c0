#include "txhist/learn/preprocess.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "txhist/parallel.hpp"

namespace txhist::learn {

std::array<WeightFraction, kNumCategories> sample_weight_fractions(std::span<const Category> labels) {
  if (labels.empty()) throw InputError("sample weights: empty label vector");
  std::array<std::int64_t, kNumCategories> counts{};
  for (Category c : labels) ++counts[ordinal(c)];
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto n) { return n > 0; });
  const auto total = static_cast<std::int64_t>(labels.size());

  std::array<WeightFraction, kNumCategories> out{};
  for (int c = 0; c < kNumCategories; ++c) {
    if (counts[c] == 0) continue;
    std::int64_t num = total;
    std::int64_t den = present * counts[c];
    const std::int64_t g = std::gcd(num, den);
    out[c] = {num / g, den / g};
  }
  return out;
}

Eigen::VectorXd sample_weights(std::span<const Category> labels) {
  const auto fractions = sample_weight_fractions(labels);
  Eigen::VectorXd w(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& f = fractions[ordinal(labels[i])];
    w[static_cast<Eigen::Index>(i)] = static_cast<double>(f.numerator) / static_cast<double>(f.denominator);
  }
  return w;
}

MaxAbsScaler MaxAbsScaler::fit(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw ContractViolation("max-abs scaler: empty training matrix");
  MaxAbsScaler s;
  s.scale = train.cwiseAbs().colwise().maxCoeff();
  s.scale = (s.scale.array() > 0.0).select(s.scale, 1.0);
  return s;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t f) const {
  std::vector<std::size_t> rows;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) rows.insert(rows.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

FoldPlan stratified_kfold(std::span<const Category> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("k-fold: k must be at least 2");
  if (k > labels.size()) {
    throw InputError("k-fold: k=" + std::to_string(k) + " exceeds sample count " +
                     std::to_string(labels.size()));
  }
  std::array<std::vector<std::size_t>, kNumCategories> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[ordinal(labels[i])].push_back(i);

  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  std::size_t deal = 0;
  for (int c = 0; c < kNumCategories; ++c) {
    auto& rows = by_class[c];
    std::mt19937_64 rng(derive_seed(seed, 1, static_cast<std::uint64_t>(c)));
    // Fisher-Yates with an explicit bounded draw so the order does not
    // depend on the standard library's distribution implementation.
    for (std::size_t i = rows.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(rows[i - 1], rows[j]);
    }
    for (std::size_t r : rows) plan.folds[deal++ % k].push_back(r);
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

}  // namespace txhist::learn
