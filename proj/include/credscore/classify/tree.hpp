#pragma once

#include <cfloat>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "credscore/classify/model.hpp"

namespace credscore::classify {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Scores value{};  // weighted class distribution, sums to 1
};

/// Resolved growth limits for one tree.
struct TreeParams {
  bool entropy = false;
  bool random_splitter = false;
  std::size_t max_features = 0;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

/// Values below 1 are fractions of the training set size (rounded up),
/// values of 1 or more are absolute counts.
inline std::size_t resolve_min_samples(double v, std::size_t n) {
  if (v < 1.0) return static_cast<std::size_t>(std::ceil(v * static_cast<double>(n)));
  return static_cast<std::size_t>(v);
}

inline std::size_t resolve_max_features(const std::string& rule, std::size_t d) {
  if (rule == "sqrt") return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
  if (rule == "log2") return std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(static_cast<double>(d))));
  return d;
}

inline TreeParams tree_params_from(const ModelSpec& spec, std::size_t n, std::size_t d) {
  TreeParams p;
  p.entropy = spec.choice("criterion") == "entropy";
  p.random_splitter = spec.params.count("splitter") && spec.choice("splitter") == "random";
  p.max_features = resolve_max_features(spec.choice("max_features"), d);
  if (!spec.at("max_depth").is_null()) p.max_depth = spec.count("max_depth");
  p.min_samples_leaf = std::max<std::size_t>(1, resolve_min_samples(spec.number("min_samples_leaf"), n));
  p.min_samples_split = std::max<std::size_t>({2, resolve_min_samples(spec.number("min_samples_split"), n),
                                               2 * p.min_samples_leaf});
  return p;
}

/// Per-sample weights from the class_weight rule ("balanced" or none).
inline Vector class_sample_weights(const std::vector<Category>& y, bool balanced) {
  Vector w(y.size(), 1.0);
  if (!balanced) return w;
  Scores count{};
  for (Category c : y) count[index_of(c)] += 1.0;
  const double n_classes = static_cast<double>(present_classes(y).size());
  for (std::size_t i = 0; i < y.size(); ++i)
    w[i] = static_cast<double>(y.size()) / (n_classes * count[index_of(y[i])]);
  return w;
}

inline double node_impurity(const Scores& wk, double total, bool entropy) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double w : wk) {
    if (w <= 0.0) continue;
    double p = w / total;
    s += entropy ? -p * std::log2(p) : p * p;
  }
  return entropy ? s : 1.0 - s;
}

/// CART decision tree. Samples with x[feature] <= threshold go left.
class Tree {
 public:
  static constexpr double kFeatureThreshold = 1e-7;

  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  const Scores& leaf_value(const Vector& x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
  }

  std::size_t depth() const { return depth_from(0); }

  /// Grows a tree on the rows with positive weight.
  static Tree grow(const Matrix& X, const std::vector<Category>& y, const Vector& weights, const TreeParams& params,
                   std::mt19937_64& rng) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < X.size(); ++i)
      if (weights[i] > 0.0) rows.push_back(i);
    if (rows.empty()) throw InputError("cannot grow a tree without samples");
    Builder b{X, y, weights, params, rng, {}};
    b.build(rows, 0);
    return Tree(std::move(b.nodes));
  }

  nlohmann::json to_json() const {
    nlohmann::json f = nlohmann::json::array(), t = nlohmann::json::array(), l = nlohmann::json::array(),
                   r = nlohmann::json::array(), v = nlohmann::json::array();
    for (const auto& n : nodes_) {
      f.push_back(n.feature);
      t.push_back(n.threshold);
      l.push_back(n.left);
      r.push_back(n.right);
      v.push_back(n.value);
    }
    return {{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"value", v}};
  }

  static Tree from_json(const nlohmann::json& j, std::size_t dim) {
    const auto& f = j.at("feature");
    std::vector<TreeNode> nodes(f.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      nodes[i].feature = f.at(i).get<int>();
      nodes[i].threshold = j.at("threshold").at(i).get<double>();
      nodes[i].left = j.at("left").at(i).get<int>();
      nodes[i].right = j.at("right").at(i).get<int>();
      nodes[i].value = j.at("value").at(i).get<Scores>();
    }
    const int n = static_cast<int>(nodes.size());
    for (const auto& node : nodes) {
      if (node.feature < 0) continue;
      if (static_cast<std::size_t>(node.feature) >= dim || node.left <= 0 || node.left >= n || node.right <= 0 ||
          node.right >= n)
        throw InputError("model: malformed tree");
    }
    if (nodes.empty()) throw InputError("model: empty tree");
    return Tree(std::move(nodes));
  }

 private:
  std::size_t depth_from(std::size_t i) const {
    if (nodes_[i].feature < 0) return 0;
    return 1 + std::max(depth_from(static_cast<std::size_t>(nodes_[i].left)),
                        depth_from(static_cast<std::size_t>(nodes_[i].right)));
  }

  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double proxy = -std::numeric_limits<double>::infinity();
    bool found = false;
  };

  struct Builder {
    const Matrix& X;
    const std::vector<Category>& y;
    const Vector& w;
    const TreeParams& params;
    std::mt19937_64& rng;
    std::vector<TreeNode> nodes;

    Scores class_weights(const std::vector<std::size_t>& rows) const {
      Scores s{};
      for (std::size_t i : rows) s[index_of(y[i])] += w[i];
      return s;
    }

    // Weighted child impurity sum, negated so that larger is better.
    double proxy(const Scores& left, const Scores& right) const {
      double wl = left[0] + left[1] + left[2], wr = right[0] + right[1] + right[2];
      return -(wl * node_impurity(left, wl, params.entropy) + wr * node_impurity(right, wr, params.entropy));
    }

    void consider_best(std::size_t f, std::vector<std::pair<double, std::size_t>>& col, Split& best) const {
      std::sort(col.begin(), col.end());
      Scores left{}, right{};
      for (auto& [v, i] : col) right[index_of(y[i])] += w[i];
      const std::size_t n = col.size();
      for (std::size_t p = 1; p < n; ++p) {
        const std::size_t moved = col[p - 1].second;
        left[index_of(y[moved])] += w[moved];
        right[index_of(y[moved])] -= w[moved];
        if (col[p].first <= col[p - 1].first + kFeatureThreshold) continue;
        if (p < params.min_samples_leaf || n - p < params.min_samples_leaf) continue;
        double score = proxy(left, right);
        if (score > best.proxy) {
          double mid = col[p - 1].first / 2.0 + col[p].first / 2.0;
          if (mid == col[p].first || !std::isfinite(mid)) mid = col[p - 1].first;
          best = {f, mid, score, true};
        }
      }
    }

    void consider_random(std::size_t f, const std::vector<std::pair<double, std::size_t>>& col, double lo, double hi,
                         Split& best) const {
      double thr = std::uniform_real_distribution<double>(lo, hi)(rng);
      if (thr >= hi) thr = lo;
      Scores left{}, right{};
      std::size_t nl = 0;
      for (auto& [v, i] : col) {
        if (v <= thr) {
          left[index_of(y[i])] += w[i];
          ++nl;
        } else {
          right[index_of(y[i])] += w[i];
        }
      }
      if (nl < params.min_samples_leaf || col.size() - nl < params.min_samples_leaf) return;
      double score = proxy(left, right);
      if (score > best.proxy) best = {f, thr, score, true};
    }

    Split find_split(const std::vector<std::size_t>& rows) const {
      const std::size_t d = X.front().size();
      std::vector<std::size_t> order(d);
      std::iota(order.begin(), order.end(), 0);
      Split best;
      std::size_t evaluated = 0;
      std::vector<std::pair<double, std::size_t>> col(rows.size());
      // Features are drawn without replacement; constant ones do not count
      // toward max_features.
      for (std::size_t drawn = 0; drawn < d && evaluated < params.max_features; ++drawn) {
        std::size_t pick = drawn + std::uniform_int_distribution<std::size_t>(0, d - drawn - 1)(rng);
        std::swap(order[drawn], order[pick]);
        const std::size_t f = order[drawn];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          double v = X[rows[r]][f];
          col[r] = {v, rows[r]};
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi <= lo + kFeatureThreshold) continue;
        ++evaluated;
        if (params.random_splitter) consider_random(f, col, lo, hi, best);
        else consider_best(f, col, best);
      }
      return best;
    }

    int build(const std::vector<std::size_t>& rows, std::size_t depth) {
      const int id = static_cast<int>(nodes.size());
      nodes.emplace_back();
      Scores wk = class_weights(rows);
      double total = wk[0] + wk[1] + wk[2];
      for (std::size_t k = 0; k < kNumCategories; ++k) nodes[static_cast<std::size_t>(id)].value[k] = wk[k] / total;

      const std::size_t n = rows.size();
      bool leaf = (params.max_depth && depth >= *params.max_depth) || n < params.min_samples_split ||
                  n < 2 * params.min_samples_leaf || node_impurity(wk, total, params.entropy) <= DBL_EPSILON;
      if (leaf) return id;
      Split s = find_split(rows);
      if (!s.found) return id;

      std::vector<std::size_t> left, right;
      for (std::size_t i : rows) (X[i][s.feature] <= s.threshold ? left : right).push_back(i);
      int l = build(left, depth + 1);
      int r = build(right, depth + 1);
      auto& node = nodes[static_cast<std::size_t>(id)];
      node.feature = static_cast<int>(s.feature);
      node.threshold = s.threshold;
      node.left = l;
      node.right = r;
      return id;
    }
  };

  std::vector<TreeNode> nodes_;
};

/// Single decision tree classifier.
class DecisionTree final : public Classifier {
 public:
  DecisionTree(ModelSpec spec, std::size_t dim, Tree tree) : spec_(std::move(spec)), dim_(dim), tree_(std::move(tree)) {}

  static DecisionTree fit(const ModelSpec& spec, const Matrix& X, const std::vector<Category>& y, std::uint64_t seed) {
    if (spec.algorithm != Algorithm::DT) throw Error("DecisionTree::fit called with a non tree spec");
    const std::size_t d = check_training_set(X, y);
    TreeParams p = tree_params_from(spec, X.size(), d);
    Vector w = class_sample_weights(y, spec.choice("class_weight") == "balanced");
    std::mt19937_64 rng(seed);
    return DecisionTree(spec, d, Tree::grow(X, y, w, p, rng));
  }

  const ModelSpec& spec() const override { return spec_; }
  std::size_t dimension() const override { return dim_; }
  const Tree& tree() const { return tree_; }

  Prediction predict(const Vector& x) const override {
    check_dimension(x);
    Prediction p;
    p.scores = tree_.leaf_value(x);
    p.label = kAllCategories[argmax(p.scores)];
    return p;
  }

  nlohmann::json parameters() const override { return {{"dimension", dim_}, {"tree", tree_.to_json()}}; }

  static DecisionTree from_parameters(const ModelSpec& spec, const nlohmann::json& j) {
    std::size_t dim = j.at("dimension").get<std::size_t>();
    return DecisionTree(spec, dim, Tree::from_json(j.at("tree"), dim));
  }

 private:
  ModelSpec spec_;
  std::size_t dim_;
  Tree tree_;
};

}  // namespace credscore::classify
