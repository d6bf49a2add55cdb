#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "credscore/classify/tree.hpp"

namespace credscore::classify {

/// Runs body(i) for i in [0, n) on a small thread pool.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Bagged decision trees combined by majority vote. Each tree gets its own
/// bootstrap sample and random stream derived from the root seed.
class RandomForest final : public Classifier {
 public:
  RandomForest(ModelSpec spec, std::size_t dim, std::vector<Tree> trees)
      : spec_(std::move(spec)), dim_(dim), trees_(std::move(trees)) {}

  static std::vector<std::uint64_t> tree_seeds(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 root(seed);
    std::vector<std::uint64_t> out(n);
    for (auto& s : out) s = root();
    return out;
  }

  static RandomForest fit(const ModelSpec& spec, const Matrix& X, const std::vector<Category>& y, std::uint64_t seed) {
    if (spec.algorithm != Algorithm::RF) throw Error("RandomForest::fit called with a non forest spec");
    const std::size_t d = check_training_set(X, y);
    const std::size_t n = X.size();
    TreeParams p = tree_params_from(spec, n, d);
    const Vector cw = class_sample_weights(y, spec.choice("class_weight") == "balanced");
    const auto seeds = tree_seeds(seed, spec.count("n_estimators"));
    std::vector<Tree> trees(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t t) {
      std::mt19937_64 rng(seeds[t]);
      Vector w(n, 0.0);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) w[pick(rng)] += 1.0;
      for (std::size_t i = 0; i < n; ++i) w[i] *= cw[i];
      trees[t] = Tree::grow(X, y, w, p, rng);
    });
    return RandomForest(spec, d, std::move(trees));
  }

  const ModelSpec& spec() const override { return spec_; }
  std::size_t dimension() const override { return dim_; }
  const std::vector<Tree>& trees() const { return trees_; }

  /// Label each tree votes for.
  static Category tree_vote(const Tree& t, const Vector& x) { return kAllCategories[argmax(t.leaf_value(x))]; }

  Prediction predict(const Vector& x) const override {
    check_dimension(x);
    Prediction p;
    for (const auto& t : trees_) p.scores[index_of(tree_vote(t, x))] += 1.0;
    for (double& s : p.scores) s /= static_cast<double>(trees_.size());
    p.label = kAllCategories[argmax(p.scores)];
    return p;
  }

  nlohmann::json parameters() const override {
    nlohmann::json j;
    j["dimension"] = dim_;
    j["trees"] = nlohmann::json::array();
    for (const auto& t : trees_) j["trees"].push_back(t.to_json());
    return j;
  }

  static RandomForest from_parameters(const ModelSpec& spec, const nlohmann::json& j) {
    std::size_t dim = j.at("dimension").get<std::size_t>();
    std::vector<Tree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(Tree::from_json(t, dim));
    if (trees.empty()) throw InputError("model: forest without trees");
    return RandomForest(spec, dim, std::move(trees));
  }

 private:
  ModelSpec spec_;
  std::size_t dim_;
  std::vector<Tree> trees_;
};

}  // namespace credscore::classify
