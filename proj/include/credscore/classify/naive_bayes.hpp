#pragma once

#include <cmath>
#include <limits>

#include "credscore/classify/model.hpp"

namespace credscore::classify {

/// Multinomial or complement naive Bayes over non-negative features.
/// Negative feature values are treated as 0.
class NaiveBayes final : public Classifier {
 public:
  static constexpr double kMinAlpha = 1e-10;

  NaiveBayes(ModelSpec spec, std::size_t dim, std::vector<Category> classes, Scores log_prior,
             std::array<Vector, kNumCategories> feature_log_prob)
      : spec_(std::move(spec)),
        dim_(dim),
        classes_(std::move(classes)),
        log_prior_(log_prior),
        flp_(std::move(feature_log_prob)) {}

  static NaiveBayes fit(const ModelSpec& spec, const Matrix& X, const std::vector<Category>& y) {
    if (spec.algorithm != Algorithm::MNB && spec.algorithm != Algorithm::CNB)
      throw Error("NaiveBayes::fit called with a non naive Bayes spec");
    const std::size_t d = check_training_set(X, y);
    const double alpha = std::max(spec.number("alpha"), kMinAlpha);
    auto classes = present_classes(y);

    std::array<Vector, kNumCategories> fc;
    Scores class_count{};
    for (auto& v : fc) v.assign(d, 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
      const std::size_t k = index_of(y[i]);
      class_count[k] += 1.0;
      for (std::size_t j = 0; j < d; ++j) fc[k][j] += std::max(X[i][j], 0.0);
    }

    Scores log_prior;
    log_prior.fill(-std::numeric_limits<double>::infinity());
    for (Category c : classes) {
      const std::size_t k = index_of(c);
      log_prior[k] = spec.flag("fit_prior") ? std::log(class_count[k] / static_cast<double>(X.size()))
                                            : -std::log(static_cast<double>(classes.size()));
    }

    std::array<Vector, kNumCategories> flp;
    if (spec.algorithm == Algorithm::MNB) {
      for (Category c : classes) {
        const std::size_t k = index_of(c);
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) total += fc[k][j] + alpha;
        flp[k].resize(d);
        for (std::size_t j = 0; j < d; ++j) flp[k][j] = std::log(fc[k][j] + alpha) - std::log(total);
      }
    } else {
      Vector all(d, 0.0);
      for (Category c : classes)
        for (std::size_t j = 0; j < d; ++j) all[j] += fc[index_of(c)][j];
      for (Category c : classes) {
        const std::size_t k = index_of(c);
        Vector comp(d);
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) total += comp[j] = all[j] + alpha - fc[k][j];
        Vector logged(d);
        double logged_sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) logged_sum += logged[j] = std::log(comp[j] / total);
        flp[k].resize(d);
        for (std::size_t j = 0; j < d; ++j) flp[k][j] = spec.flag("norm") ? logged[j] / logged_sum : -logged[j];
      }
    }
    return NaiveBayes(spec, d, std::move(classes), log_prior, std::move(flp));
  }

  const ModelSpec& spec() const override { return spec_; }
  std::size_t dimension() const override { return dim_; }

  /// Joint log-likelihood per category (-inf for classes unseen in training).
  Scores joint_log_likelihood(const Vector& x) const {
    check_dimension(x);
    Scores jll;
    jll.fill(-std::numeric_limits<double>::infinity());
    for (Category c : classes_) {
      const std::size_t k = index_of(c);
      double s = 0.0;
      for (std::size_t j = 0; j < dim_; ++j)
        if (x[j] > 0.0) s += x[j] * flp_[k][j];
      // the class prior only enters the complement model when a single class was seen
      if (spec_.algorithm == Algorithm::MNB || classes_.size() == 1) s += log_prior_[k];
      jll[k] = s;
    }
    return jll;
  }

  Prediction predict(const Vector& x) const override {
    Scores jll = joint_log_likelihood(x);
    Prediction p;
    p.label = kAllCategories[argmax(jll)];
    double m = jll[argmax(jll)];
    double z = 0.0;
    for (double v : jll) z += std::exp(v - m);
    for (std::size_t k = 0; k < kNumCategories; ++k) p.scores[k] = std::exp(jll[k] - m) / z;
    return p;
  }

  nlohmann::json parameters() const override {
    nlohmann::json j;
    j["classes"] = nlohmann::json::array();
    for (Category c : classes_) j["classes"].push_back(to_string(c));
    j["dimension"] = dim_;
    for (Category c : classes_) {
      j["class_log_prior"][to_string(c)] = log_prior_[index_of(c)];
      j["feature_log_prob"][to_string(c)] = flp_[index_of(c)];
    }
    return j;
  }

  static NaiveBayes from_parameters(const ModelSpec& spec, const nlohmann::json& j) {
    std::vector<Category> classes;
    Scores lp;
    lp.fill(-std::numeric_limits<double>::infinity());
    std::array<Vector, kNumCategories> flp;
    const std::size_t dim = j.at("dimension").get<std::size_t>();
    for (const auto& name : j.at("classes")) {
      auto c = parse_category(name.get<std::string>());
      if (!c) throw InputError("model: unknown class " + name.dump());
      classes.push_back(*c);
      lp[index_of(*c)] = j.at("class_log_prior").at(to_string(*c)).get<double>();
      flp[index_of(*c)] = j.at("feature_log_prob").at(to_string(*c)).get<Vector>();
      if (flp[index_of(*c)].size() != dim) throw InputError("model: feature_log_prob has the wrong length");
    }
    return NaiveBayes(spec, dim, std::move(classes), lp, std::move(flp));
  }

 private:
  ModelSpec spec_;
  std::size_t dim_;
  std::vector<Category> classes_;
  Scores log_prior_;
  std::array<Vector, kNumCategories> flp_;
};

}  // namespace credscore::classify
