#pragma once

#include <fstream>

#include "credscore/classify/forest.hpp"
#include "credscore/classify/knn.hpp"
#include "credscore/classify/naive_bayes.hpp"
#include "credscore/classify/tree.hpp"

namespace credscore::classify {

inline constexpr int kModelFormatVersion = 1;

/// Trains the classifier described by `spec`. Deterministic for a fixed seed.
inline std::unique_ptr<Classifier> train(const ModelSpec& spec, const Matrix& X, const std::vector<Category>& y,
                                         std::uint64_t seed) {
  switch (spec.algorithm) {
    case Algorithm::MNB:
    case Algorithm::CNB: return std::make_unique<NaiveBayes>(NaiveBayes::fit(spec, X, y));
    case Algorithm::KNN: return std::make_unique<KNearest>(KNearest::fit(spec, X, y));
    case Algorithm::DT: return std::make_unique<DecisionTree>(DecisionTree::fit(spec, X, y, seed));
    case Algorithm::RF: return std::make_unique<RandomForest>(RandomForest::fit(spec, X, y, seed));
  }
  throw Error("unsupported algorithm");
}

inline nlohmann::ordered_json model_to_json(const Classifier& m) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["spec"] = m.spec().to_json();
  j["parameters"] = m.parameters();
  return j;
}

inline std::unique_ptr<Classifier> model_from_json(const nlohmann::json& j) {
  try {
    int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw InputError("model format version " + std::to_string(version) + " is not supported");
    ModelSpec spec = ModelSpec::from_json(j.at("spec"));
    const auto& p = j.at("parameters");
    switch (spec.algorithm) {
      case Algorithm::MNB:
      case Algorithm::CNB: return std::make_unique<NaiveBayes>(NaiveBayes::from_parameters(spec, p));
      case Algorithm::KNN: return std::make_unique<KNearest>(KNearest::from_parameters(spec, p));
      case Algorithm::DT: return std::make_unique<DecisionTree>(DecisionTree::from_parameters(spec, p));
      case Algorithm::RF: return std::make_unique<RandomForest>(RandomForest::from_parameters(spec, p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model: ") + e.what());
  }
  throw InputError("model: unsupported algorithm");
}

}  // namespace credscore::classify
