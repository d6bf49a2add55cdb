#pragma once

#include <random>

#include "credscore/classify/train.hpp"

namespace credscore::classify {

using Fold = std::vector<std::size_t>;

/// k disjoint test folds covering every index. Each class is shuffled and
/// dealt round-robin, continuing where the previous class stopped, so every
/// fold holds floor or ceil of n_c / k members of class c.
inline std::vector<Fold> stratified_kfold(const std::vector<Category>& y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("cross-validation needs at least 2 folds");
  std::array<std::vector<std::size_t>, kNumCategories> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[index_of(y[i])].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<Fold> folds(k);
  std::size_t next = 0;
  for (Category c : kAllCategories) {
    auto& members = by_class[index_of(c)];
    if (members.empty()) continue;
    if (members.size() < k)
      throw InputError("class '" + to_string(c) + "' has " + std::to_string(members.size()) +
                       " samples, fewer than the " + std::to_string(k) + " folds");
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Indices not in `test`, ascending.
inline std::vector<std::size_t> complement(const Fold& test, std::size_t n) {
  std::vector<bool> in(n, false);
  for (std::size_t i : test) in[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

struct ClassMetrics {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;  // percent
  bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
};

struct EvalReport {
  std::array<ClassMetrics, kNumCategories> per_class;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;

  const ClassMetrics& operator[](Category c) const { return per_class[index_of(c)]; }
};

/// Per-class precision, recall and F1 in percent. A zero denominator yields
/// 0 with the matching undefined flag set.
inline EvalReport evaluate(const std::vector<Category>& predicted, const std::vector<Category>& truth) {
  if (predicted.size() != truth.size()) throw InputError("prediction and truth lengths differ");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++r.per_class[index_of(truth[i])].tp;
    } else {
      ++r.per_class[index_of(predicted[i])].fp;
      ++r.per_class[index_of(truth[i])].fn;
    }
  }
  for (auto& m : r.per_class) {
    auto tp = static_cast<double>(m.tp);
    m.precision_undefined = m.tp + m.fp == 0;
    m.recall_undefined = m.tp + m.fn == 0;
    m.precision = m.precision_undefined ? 0.0 : 100.0 * tp / static_cast<double>(m.tp + m.fp);
    m.recall = m.recall_undefined ? 0.0 : 100.0 * tp / static_cast<double>(m.tp + m.fn);
    m.f1_undefined = m.precision + m.recall == 0.0;
    m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return r;
}

/// Mean F1 (fraction) over the classes seen in either truth or predictions.
inline double macro_f1(const std::vector<Category>& predicted, const std::vector<Category>& truth) {
  EvalReport r = evaluate(predicted, truth);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : r.per_class) {
    if (m.tp + m.fp + m.fn == 0) continue;
    sum += m.f1 / 100.0;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

template <class T>
std::vector<T> take(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

/// Mean macro-F1 of `spec` over the folds.
inline double cross_val_score(const ModelSpec& spec, const Matrix& X, const std::vector<Category>& y,
                              const std::vector<Fold>& folds, std::uint64_t seed) {
  double total = 0.0;
  for (const auto& test : folds) {
    auto train_idx = complement(test, X.size());
    auto model = train(spec, take(X, train_idx), take(y, train_idx), seed);
    std::vector<Category> pred;
    for (std::size_t i : test) pred.push_back(model->predict(X[i]).label);
    total += macro_f1(pred, take(y, test));
  }
  return total / static_cast<double>(folds.size());
}

/// Hyperparameter grid: name -> candidate values, in declaration order.
using Grid = nlohmann::ordered_json;

/// Every combination of the grid, the last key varying fastest.
inline std::vector<Hyperparameters> expand_grid(const Grid& grid) {
  if (!grid.is_object() || grid.empty()) throw InputError("hyperparameter grid must be a non-empty object");
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array() || it.value().empty())
      throw InputError("grid entry '" + it.key() + "' must be a non-empty list");
    std::vector<nlohmann::json> values;
    for (const auto& v : it.value()) values.push_back(nlohmann::json::parse(v.dump()));
    axes.emplace_back(it.key(), std::move(values));
  }
  std::vector<Hyperparameters> out;
  std::vector<std::size_t> pos(axes.size(), 0);
  while (true) {
    Hyperparameters h;
    for (std::size_t a = 0; a < axes.size(); ++a) h[axes[a].first] = axes[a].second[pos[a]];
    out.push_back(std::move(h));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++pos[a] < axes[a].second.size()) break;
      pos[a] = 0;
      if (a == 0) return out;
    }
  }
}

struct GridResult {
  ModelSpec best;
  double best_score = 0.0;
  std::vector<std::pair<ModelSpec, double>> scores;  // enumeration order
};

/// Exhaustive search by mean macro-F1; the earliest configuration wins ties.
inline GridResult grid_search(Algorithm algorithm, const Grid& grid, const Matrix& X, const std::vector<Category>& y,
                              std::size_t k, std::uint64_t seed) {
  auto configs = expand_grid(grid);
  std::vector<ModelSpec> specs;
  for (const auto& h : configs) specs.push_back(ModelSpec::make(algorithm, h));
  auto folds = stratified_kfold(y, k, seed);
  GridResult r;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    double score = cross_val_score(specs[i], X, y, folds, seed);
    r.scores.emplace_back(specs[i], score);
    if (i == 0 || score > r.best_score) {
      r.best = specs[i];
      r.best_score = score;
    }
  }
  return r;
}

}  // namespace credscore::classify
