#include "txhist/learn/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "txhist/core.hpp"

namespace txhist::learn {

namespace {

constexpr int kMaxClasses = kNumCategories;

struct ClassStats {
  std::array<double, kMaxClasses> w{};
  double total = 0;
};

class EntropyCriterion {
 public:
  using Stats = ClassStats;

  EntropyCriterion(std::span<const int> classes, std::span<const double> weights, int num_classes)
      : classes_(classes), weights_(weights), num_classes_(num_classes) {}

  void add(Stats& s, std::size_t row) const {
    s.w[static_cast<std::size_t>(classes_[row])] += weights_[row];
    s.total += weights_[row];
  }
  Stats minus(const Stats& a, const Stats& b) const {
    Stats out;
    for (int c = 0; c < num_classes_; ++c) out.w[c] = a.w[c] - b.w[c];
    out.total = a.total - b.total;
    return out;
  }
  // -W * H(p), entropy in bits.
  double score(const Stats& s) const {
    double sum = 0;
    for (int c = 0; c < num_classes_; ++c) {
      if (s.w[c] > 0) sum += s.w[c] * std::log2(s.w[c] / s.total);
    }
    return sum;
  }
  double gain(const Stats& parent, const Stats& left, const Stats& right) const {
    return score(left) + score(right) - score(parent);
  }
  bool valid(const Stats& left, const Stats& right) const { return left.total > 0 && right.total > 0; }
  bool accept(double) const { return true; }
  bool pure(const Stats& s) const {
    int nonzero = 0;
    for (int c = 0; c < num_classes_; ++c) nonzero += s.w[c] > 0;
    return nonzero <= 1;
  }
  double weight(const Stats& s) const { return s.total; }
  std::vector<double> leaf_value(const Stats& s) const {
    std::vector<double> p(static_cast<std::size_t>(num_classes_), 0.0);
    if (s.total > 0) {
      for (int c = 0; c < num_classes_; ++c) p[c] = s.w[c] / s.total;
    }
    return p;
  }

 private:
  std::span<const int> classes_;
  std::span<const double> weights_;
  int num_classes_;
};

struct GradStats {
  double g = 0;
  double h = 0;
};

class NewtonCriterion {
 public:
  using Stats = GradStats;

  NewtonCriterion(std::span<const double> g, std::span<const double> h, const BoostingParams& p)
      : g_(g), h_(h), p_(p) {}

  void add(Stats& s, std::size_t row) const {
    s.g += g_[row];
    s.h += h_[row];
  }
  Stats minus(const Stats& a, const Stats& b) const { return {a.g - b.g, a.h - b.h}; }
  double score(const Stats& s) const { return s.g * s.g / (s.h + p_.lambda); }
  double gain(const Stats& parent, const Stats& left, const Stats& right) const {
    return 0.5 * (score(left) + score(right) - score(parent));
  }
  bool valid(const Stats& left, const Stats& right) const {
    return left.h >= p_.min_child_hessian && right.h >= p_.min_child_hessian;
  }
  bool accept(double gain) const { return gain > 0; }
  bool pure(const Stats&) const { return false; }
  double weight(const Stats& s) const { return s.h; }
  std::vector<double> leaf_value(const Stats& s) const {
    return {-p_.learning_rate * s.g / (s.h + p_.lambda)};
  }

 private:
  std::span<const double> g_;
  std::span<const double> h_;
  const BoostingParams& p_;
};

template <typename Criterion>
class Grower {
 public:
  using Stats = typename Criterion::Stats;
  using Lists = std::vector<std::vector<std::size_t>>;

  Grower(const Eigen::MatrixXd& x, const Criterion& crit, const TreeParams& params,
         std::mt19937_64* rng)
      : x_(x), crit_(crit), params_(params), rng_(rng),
        goes_left_(static_cast<std::size_t>(x.rows()), 0) {}

  Tree grow(const SortedColumns& sorted) {
    if (sorted.rows() == 0) throw ContractViolation("cannot grow a tree on zero rows");
    Lists lists = sorted.columns();
    build(std::move(lists), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
  };

  std::vector<int> candidate_features() {
    const auto d = static_cast<std::size_t>(x_.cols());
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    if (params_.max_features == 0 || params_.max_features >= d || rng_ == nullptr) return all;
    // Partial Fisher-Yates, then ascending so ties resolve by feature index.
    for (std::size_t i = 0; i < params_.max_features; ++i) {
      const std::size_t j = i + static_cast<std::size_t>((*rng_)() % (d - i));
      std::swap(all[i], all[j]);
    }
    all.resize(params_.max_features);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const Lists& lists, const Stats& total) {
    Split best;
    bool found = false;
    const std::size_t n = lists.front().size();
    for (int f : candidate_features()) {
      const auto& order = lists[static_cast<std::size_t>(f)];
      Stats left{};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        crit_.add(left, order[i]);
        const double lo = x_(static_cast<Eigen::Index>(order[i]), f);
        const double hi = x_(static_cast<Eigen::Index>(order[i + 1]), f);
        if (!(lo < hi)) continue;
        if (i + 1 < params_.min_samples_leaf || n - i - 1 < params_.min_samples_leaf) continue;
        const Stats right = crit_.minus(total, left);
        if (!crit_.valid(left, right)) continue;
        const double gain = crit_.gain(total, left, right);
        if (!found || gain > best.gain) {
          double t = std::midpoint(lo, hi);
          if (!(t < hi)) t = lo;
          best = {f, t, gain};
          found = true;
        }
      }
    }
    if (!found || !crit_.accept(best.gain)) return {};
    return best;
  }

  int build(Lists lists, int depth) {
    const auto& rows = lists.front();
    Stats total{};
    for (std::size_t r : rows) crit_.add(total, r);

    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().weight = crit_.weight(total);
    tree_.nodes.back().value = crit_.leaf_value(total);

    const std::size_t n = rows.size();
    if ((params_.max_depth >= 0 && depth >= params_.max_depth) || n < params_.min_samples_split ||
        n < 2 * params_.min_samples_leaf || crit_.pure(total)) {
      return index;
    }
    const Split split = best_split(lists, total);
    if (split.feature < 0) return index;

    for (std::size_t r : rows) {
      goes_left_[r] = x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold;
    }
    Lists left(lists.size()), right(lists.size());
    for (std::size_t f = 0; f < lists.size(); ++f) {
      for (std::size_t r : lists[f]) (goes_left_[r] ? left[f] : right[f]).push_back(r);
    }
    lists.clear();
    lists.shrink_to_fit();

    tree_.nodes[index].feature = split.feature;
    tree_.nodes[index].threshold = split.threshold;
    tree_.nodes[index].gain = split.gain;
    const int l = build(std::move(left), depth + 1);
    tree_.nodes[index].left = l;
    const int r = build(std::move(right), depth + 1);
    tree_.nodes[index].right = r;
    return index;
  }

  const Eigen::MatrixXd& x_;
  const Criterion& crit_;
  const TreeParams& params_;
  std::mt19937_64* rng_;
  std::vector<char> goes_left_;
  Tree tree_;
};

int depth_from(const Tree& tree, int node) {
  const auto& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_from(tree, n.left), depth_from(tree, n.right));
}

}  // namespace

int Tree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Eigen::VectorXd Tree::split_gains(Eigen::Index num_features) const {
  Eigen::VectorXd gains = Eigen::VectorXd::Zero(num_features);
  for (const auto& n : nodes) {
    if (!n.is_leaf()) gains[n.feature] += n.gain;
  }
  return gains;
}

SortedColumns::SortedColumns(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  columns_.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto& order = columns_[static_cast<std::size_t>(j)];
    order.assign(rows.begin(), rows.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = x(static_cast<Eigen::Index>(a), j);
      const double xb = x(static_cast<Eigen::Index>(b), j);
      return xa < xb || (xa == xb && a < b);
    });
  }
}

SortedColumns SortedColumns::filter(const std::vector<char>& keep) const {
  SortedColumns out;
  out.columns_.resize(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    auto& dst = out.columns_[j];
    dst.reserve(columns_[j].size());
    std::copy_if(columns_[j].begin(), columns_[j].end(), std::back_inserter(dst),
                 [&](std::size_t r) { return keep[r] != 0; });
  }
  return out;
}

Tree grow_classification_tree(const Eigen::MatrixXd& x, std::span<const int> classes,
                              std::span<const double> weights, int num_classes,
                              const SortedColumns& sorted, const TreeParams& params,
                              std::mt19937_64* rng) {
  if (num_classes < 1 || num_classes > kMaxClasses) {
    throw ContractViolation("classification tree: unsupported class count");
  }
  const EntropyCriterion crit(classes, weights, num_classes);
  return Grower<EntropyCriterion>(x, crit, params, rng).grow(sorted);
}

void attribute_information_gain(Tree& tree, const Eigen::MatrixXd& x, std::span<const int> classes,
                                std::span<const double> weights, int num_classes) {
  const EntropyCriterion crit(classes, weights, num_classes);
  std::vector<ClassStats> stats(tree.nodes.size());
  for (std::size_t row = 0; row < classes.size(); ++row) {
    std::size_t index = 0;
    for (;;) {
      crit.add(stats[index], row);
      const TreeNode& n = tree.nodes[index];
      if (n.is_leaf()) break;
      index = static_cast<std::size_t>(x(static_cast<Eigen::Index>(row), n.feature) <= n.threshold ? n.left
                                                                                                  : n.right);
    }
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    TreeNode& n = tree.nodes[i];
    n.weight = stats[i].total;
    n.gain = n.is_leaf() ? 0.0
                         : crit.gain(stats[i], stats[static_cast<std::size_t>(n.left)],
                                     stats[static_cast<std::size_t>(n.right)]);
  }
}

Tree grow_gradient_tree(const Eigen::MatrixXd& x, std::span<const double> gradients,
                        std::span<const double> hessians, const SortedColumns& sorted,
                        const BoostingParams& params) {
  const NewtonCriterion crit(gradients, hessians, params);
  return Grower<NewtonCriterion>(x, crit, params.tree, nullptr).grow(sorted);
}

}  // namespace txhist::learn
