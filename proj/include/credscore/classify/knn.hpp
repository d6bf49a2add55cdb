#pragma once

#include <cmath>
#include <numeric>

#include "credscore/classify/model.hpp"

namespace credscore::classify {

/// Brute-force k-nearest neighbours under the Minkowski distance.
/// Equidistant neighbours are taken in training order.
class KNearest final : public Classifier {
 public:
  KNearest(ModelSpec spec, Matrix X, std::vector<Category> y) : spec_(std::move(spec)), X_(std::move(X)), y_(std::move(y)) {
    dim_ = X_.empty() ? 0 : X_.front().size();
    p_ = spec_.number("p");
    k_ = spec_.count("n_neighbors");
    distance_weights_ = spec_.choice("weights") == "distance";
  }

  static KNearest fit(const ModelSpec& spec, const Matrix& X, const std::vector<Category>& y) {
    if (spec.algorithm != Algorithm::KNN) throw Error("KNearest::fit called with a non kNN spec");
    check_training_set(X, y);
    if (spec.count("n_neighbors") > X.size())
      throw InputError("n_neighbors = " + std::to_string(spec.count("n_neighbors")) + " exceeds the " +
                       std::to_string(X.size()) + " training samples");
    return KNearest(spec, X, y);
  }

  const ModelSpec& spec() const override { return spec_; }
  std::size_t dimension() const override { return dim_; }

  double distance(const Vector& a, const Vector& b) const {
    double s = 0.0;
    if (p_ == 1.0) {
      for (std::size_t j = 0; j < dim_; ++j) s += std::abs(a[j] - b[j]);
      return s;
    }
    if (p_ == 2.0) {
      for (std::size_t j = 0; j < dim_; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
      return std::sqrt(s);
    }
    for (std::size_t j = 0; j < dim_; ++j) s += std::pow(std::abs(a[j] - b[j]), p_);
    return std::pow(s, 1.0 / p_);
  }

  Prediction predict(const Vector& x) const override {
    check_dimension(x);
    std::vector<std::pair<double, std::size_t>> d(X_.size());
    for (std::size_t i = 0; i < X_.size(); ++i) d[i] = {distance(x, X_[i]), i};
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(k_), d.end());
    Scores votes{};
    bool exact = distance_weights_ && d.front().first == 0.0;
    for (std::size_t n = 0; n < k_; ++n) {
      auto [dist, i] = d[n];
      double w = 1.0;
      // a zero-distance neighbour takes all the weight
      if (exact) w = dist == 0.0 ? 1.0 : 0.0;
      else if (distance_weights_) w = 1.0 / dist;
      votes[index_of(y_[i])] += w;
    }
    double total = votes[0] + votes[1] + votes[2];
    Prediction p;
    for (std::size_t k = 0; k < kNumCategories; ++k) p.scores[k] = votes[k] / total;
    p.label = kAllCategories[argmax(p.scores)];
    return p;
  }

  nlohmann::json parameters() const override {
    nlohmann::json j;
    j["dimension"] = dim_;
    j["X"] = X_;
    j["y"] = nlohmann::json::array();
    for (Category c : y_) j["y"].push_back(to_string(c));
    return j;
  }

  static KNearest from_parameters(const ModelSpec& spec, const nlohmann::json& j) {
    Matrix X = j.at("X").get<Matrix>();
    std::vector<Category> y;
    for (const auto& v : j.at("y")) {
      auto c = parse_category(v.get<std::string>());
      if (!c) throw InputError("model: unknown class " + v.dump());
      y.push_back(*c);
    }
    KNearest m(spec, std::move(X), std::move(y));
    m.dim_ = j.at("dimension").get<std::size_t>();
    return m;
  }

 private:
  ModelSpec spec_;
  Matrix X_;
  std::vector<Category> y_;
  std::size_t dim_ = 0;
  double p_ = 1.0;
  std::size_t k_ = 1;
  bool distance_weights_ = false;
};

}  // namespace credscore::classify
