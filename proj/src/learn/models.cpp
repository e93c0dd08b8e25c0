#include "txhist/learn/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "txhist/parallel.hpp"

namespace txhist::learn {

namespace {

struct Prepared {
  std::vector<Category> classes;
  std::vector<int> y;  // class index per row
  Eigen::VectorXd w;
};

Prepared prepare(const Dataset& data) {
  Prepared p;
  for (Category c : data.labels) {
    if (std::find(p.classes.begin(), p.classes.end(), c) == p.classes.end()) p.classes.push_back(c);
  }
  std::sort(p.classes.begin(), p.classes.end());
  std::array<int, kNumCategories> index{};
  for (std::size_t k = 0; k < p.classes.size(); ++k) index[ordinal(p.classes[k])] = static_cast<int>(k);
  p.y.reserve(data.labels.size());
  for (Category c : data.labels) p.y.push_back(index[ordinal(c)]);
  p.w = data.weighted() ? data.weights : Eigen::VectorXd::Ones(data.rows());
  return p;
}

Eigen::MatrixXd one_hot(std::span<const int> y, Eigen::Index k) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), k);
  for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), y[i]) = 1.0;
  return out;
}

// Row-wise softmax, stabilized by the row maximum.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd p = (scores.colwise() - scores.rowwise().maxCoeff()).array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(rng() % i)]);
}

void train_logistic(Model& m, const Dataset& data, const Prepared& p) {
  const auto& cfg = m.config.logistic;
  m.scaler = MaxAbsScaler::fit(data.features);
  const Eigen::MatrixXd x = m.scaler->transform(data.features);
  const auto k = static_cast<Eigen::Index>(m.num_classes());
  const Eigen::MatrixXd y = one_hot(p.y, k);
  const Eigen::VectorXd omega = p.w / p.w.sum();

  m.coefficients = Eigen::MatrixXd::Zero(x.cols(), k);
  m.intercept = Eigen::RowVectorXd::Zero(k);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const Eigen::MatrixXd prob = softmax((x * m.coefficients).rowwise() + m.intercept);
    const Eigen::MatrixXd residual = ((prob - y).array().colwise() * omega.array()).matrix();
    const Eigen::MatrixXd grad_w = x.transpose() * residual + cfg.l2 * m.coefficients;
    const Eigen::RowVectorXd grad_b = residual.colwise().sum();
    if (std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm()) < cfg.tolerance) break;
    m.coefficients -= cfg.learning_rate * grad_w;
    m.intercept -= cfg.learning_rate * grad_b;
  }
}

// Weighted one-vs-rest perceptron.
void train_perceptron(Model& m, const Dataset& data, const Prepared& p) {
  const auto& cfg = m.config.perceptron;
  m.scaler = MaxAbsScaler::fit(data.features);
  const Eigen::MatrixXd x = m.scaler->transform(data.features);
  const auto k = static_cast<Eigen::Index>(m.num_classes());
  m.coefficients = Eigen::MatrixXd::Zero(x.cols(), k);
  m.intercept = Eigen::RowVectorXd::Zero(k);

  std::mt19937_64 rng(derive_seed(m.seed, 3, 0));
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t i : order) {
      const auto row = static_cast<Eigen::Index>(i);
      const Eigen::RowVectorXd s = x.row(row) * m.coefficients + m.intercept;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double target = p.y[i] == c ? 1.0 : -1.0;
        if (target * s[c] <= 0) {
          const double step = cfg.learning_rate * p.w[row] * target;
          m.coefficients.col(c) += step * x.row(row).transpose();
          m.intercept[c] += step;
        }
      }
    }
  }
}

std::vector<std::size_t> all_rows(Eigen::Index n) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void train_tree(Model& m, const Dataset& data, const Prepared& p) {
  const auto& cfg = m.config.tree;
  const SortedColumns sorted(data.features, all_rows(data.rows()));
  TreeParams params;
  params.max_depth = cfg.max_depth;
  params.min_samples_leaf = cfg.min_samples_leaf;
  params.min_samples_split = cfg.min_samples_split;
  const std::vector<double> w(p.w.data(), p.w.data() + p.w.size());
  m.trees.push_back(grow_classification_tree(data.features, p.y, w,
                                             static_cast<int>(m.num_classes()), sorted, params,
                                             nullptr));
}

void train_forest(Model& m, const Dataset& data, const Prepared& p, unsigned threads) {
  const auto& cfg = m.config.forest;
  const auto n = static_cast<std::size_t>(data.rows());
  const SortedColumns sorted(data.features, all_rows(data.rows()));
  TreeParams params;
  params.max_depth = cfg.max_depth;
  params.min_samples_leaf = cfg.min_samples_leaf;
  params.max_features = cfg.max_features
                            ? cfg.max_features
                            : static_cast<std::size_t>(std::floor(std::sqrt(data.cols())));
  m.trees.resize(static_cast<std::size_t>(cfg.trees));
  parallel_for(m.trees.size(), threads, [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(m.seed, 2, t));
    std::vector<double> w(p.w.data(), p.w.data() + p.w.size());
    std::vector<char> keep(n, 1);
    if (cfg.bootstrap) {
      std::vector<std::size_t> count(n, 0);
      for (std::size_t draw = 0; draw < n; ++draw) ++count[static_cast<std::size_t>(rng() % n)];
      for (std::size_t r = 0; r < n; ++r) {
        w[r] *= static_cast<double>(count[r]);
        keep[r] = count[r] > 0;
      }
    }
    const SortedColumns bag = cfg.bootstrap ? sorted.filter(keep) : sorted;
    m.trees[t] = grow_classification_tree(data.features, p.y, w, static_cast<int>(m.num_classes()),
                                          bag, params, &rng);
  });
}

void train_boosting(Model& m, const Dataset& data, const Prepared& p, unsigned threads) {
  const auto& cfg = m.config.boosting;
  const Eigen::Index n = data.rows();
  const auto k = static_cast<Eigen::Index>(m.num_classes());
  const SortedColumns sorted(data.features, all_rows(n));
  const Eigen::MatrixXd y = one_hot(p.y, k);

  m.base_score.resize(k);
  const double total = p.w.sum();
  for (Eigen::Index c = 0; c < k; ++c) {
    m.base_score[c] = std::log(y.col(c).dot(p.w) / total);
  }
  BoostingParams params;
  params.tree.max_depth = cfg.max_depth;
  params.tree.min_samples_leaf = cfg.min_samples_leaf;
  params.lambda = cfg.lambda;
  params.min_child_hessian = cfg.min_child_hessian;
  params.learning_rate = cfg.learning_rate;

  const std::vector<double> w(p.w.data(), p.w.data() + p.w.size());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, k).rowwise() + m.base_score;
  m.trees.resize(static_cast<std::size_t>(cfg.rounds * k));
  for (int round = 0; round < cfg.rounds; ++round) {
    const Eigen::MatrixXd prob = softmax(scores);
    parallel_for(static_cast<std::size_t>(k), threads, [&](std::size_t c) {
      const auto col = static_cast<Eigen::Index>(c);
      std::vector<double> g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double pr = prob(i, col);
        g[static_cast<std::size_t>(i)] = p.w[i] * (pr - y(i, col));
        h[static_cast<std::size_t>(i)] = std::max(p.w[i] * pr * (1.0 - pr), 1e-16);
      }
      Tree& tree = m.trees[static_cast<std::size_t>(round * k) + c];
      tree = grow_gradient_tree(data.features, g, h, sorted, params);
      attribute_information_gain(tree, data.features, p.y, w, static_cast<int>(k));
    });
    for (Eigen::Index c = 0; c < k; ++c) {
      const Tree& tree = m.trees[static_cast<std::size_t>(round * k + c)];
      for (Eigen::Index i = 0; i < n; ++i) scores(i, c) += tree.leaf(data.features.row(i)).value[0];
    }
  }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogisticRegression: return "logistic";
    case ModelKind::Perceptron: return "perceptron";
    case ModelKind::DecisionTree: return "tree";
    case ModelKind::RandomForest: return "forest";
    case ModelKind::GradientBoosting: return "gbt";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::LogisticRegression, ModelKind::Perceptron, ModelKind::DecisionTree,
                      ModelKind::RandomForest, ModelKind::GradientBoosting}) {
    if (name == model_kind_name(k)) return k;
  }
  throw InputError("unknown model kind '" + std::string(name) +
                   "' (expected logistic, perceptron, tree, forest, gbt)");
}

bool is_tree_family(ModelKind kind) {
  return kind == ModelKind::DecisionTree || kind == ModelKind::RandomForest ||
         kind == ModelKind::GradientBoosting;
}

Model train(ModelKind kind, const Dataset& data, const ModelConfig& config, std::uint64_t seed,
            unsigned threads) {
  data.validate();
  if (data.rows() == 0) throw InputError("cannot train on an empty dataset");
  const Prepared p = prepare(data);

  Model m;
  m.kind = kind;
  m.config = config;
  m.seed = seed;
  m.feature_names = data.feature_names;
  m.classes = p.classes;
  if (m.classes.size() == 1) {
    m.constant = true;
    return m;
  }
  switch (kind) {
    case ModelKind::LogisticRegression: train_logistic(m, data, p); break;
    case ModelKind::Perceptron: train_perceptron(m, data, p); break;
    case ModelKind::DecisionTree: train_tree(m, data, p); break;
    case ModelKind::RandomForest: train_forest(m, data, p, threads); break;
    case ModelKind::GradientBoosting: train_boosting(m, data, p, threads); break;
  }
  return m;
}

Eigen::MatrixXd class_scores(const Model& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.feature_names.size()) {
    throw InputError("model expects " + std::to_string(model.feature_names.size()) +
                     " feature columns, got " + std::to_string(x.cols()));
  }
  const auto k = static_cast<Eigen::Index>(model.num_classes());
  if (model.constant) return Eigen::MatrixXd::Ones(x.rows(), k);

  switch (model.kind) {
    case ModelKind::LogisticRegression:
    case ModelKind::Perceptron:
      return (model.scaler->transform(x) * model.coefficients).rowwise() + model.intercept;
    case ModelKind::DecisionTree:
    case ModelKind::RandomForest: {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.rows(), k);
      for (const Tree& tree : model.trees) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          s.row(i) += Eigen::Map<const Eigen::RowVectorXd>(tree.leaf(x.row(i)).value.data(), k);
        }
      }
      return s / static_cast<double>(model.trees.size());
    }
    case ModelKind::GradientBoosting: {
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.rows(), k).rowwise() + model.base_score;
      for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto c = static_cast<Eigen::Index>(t % model.num_classes());
        for (Eigen::Index i = 0; i < x.rows(); ++i) s(i, c) += model.trees[t].leaf(x.row(i)).value[0];
      }
      return s;
    }
  }
  throw ContractViolation("unknown model kind");
}

std::vector<Category> predict(const Model& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd s = class_scores(model, x);
  std::vector<Category> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(i, c) > s(i, best)) best = c;
    }
    out.push_back(model.classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

Eigen::VectorXd importance_vector(const Model& model) {
  if (!is_tree_family(model.kind)) {
    throw InputError("feature importance requires a tree-based model, got '" +
                     std::string(model_kind_name(model.kind)) + "'");
  }
  const auto d = static_cast<Eigen::Index>(model.feature_names.size());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  if (model.trees.empty()) return total;
  for (const Tree& t : model.trees) total += t.split_gains(d) / t.nodes.front().weight;
  return total / static_cast<double>(model.trees.size());
}

std::vector<FeatureImportance> feature_importance(const Model& model) {
  const Eigen::VectorXd scores = importance_vector(model);
  std::vector<FeatureImportance> out;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    out.push_back({model.feature_names[static_cast<std::size_t>(j)], static_cast<int>(j), scores[j]});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

}  // namespace txhist::learn
