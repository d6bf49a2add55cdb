#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "credscore/corpus.hpp"
#include "credscore/error.hpp"

namespace credscore::classify {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;
using Scores = std::array<double, kNumCategories>;

enum class Algorithm { MNB, CNB, KNN, DT, RF };

inline constexpr std::array<Algorithm, 5> kAllAlgorithms{Algorithm::MNB, Algorithm::CNB, Algorithm::KNN,
                                                         Algorithm::DT, Algorithm::RF};

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::MNB: return "mnb";
    case Algorithm::CNB: return "cnb";
    case Algorithm::KNN: return "knn";
    case Algorithm::DT: return "dt";
    case Algorithm::RF: return "rf";
  }
  return "rf";
}

inline Algorithm parse_algorithm(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == lower) return a;
  throw InputError("unknown algorithm '" + std::string(s) + "' (expected mnb, cnb, knn, dt or rf)");
}

using Hyperparameters = std::map<std::string, nlohmann::json>;

namespace detail {

enum class Domain { NonNegative, Positive, PositiveInt, OptionalPositiveInt, AtLeastOne, Bool, Choice };

struct ParamRule {
  const char* name;
  Domain domain;
  std::vector<nlohmann::json> choices;  // for Choice
  nlohmann::json default_value;
};

inline const std::vector<ParamRule>& rules_for(Algorithm a) {
  using nlohmann::json;
  static const std::vector<ParamRule> nb{{"alpha", Domain::NonNegative, {}, 0.25},
                                         {"fit_prior", Domain::Bool, {}, true}};
  static const std::vector<ParamRule> cnb{{"alpha", Domain::NonNegative, {}, 0.25},
                                          {"fit_prior", Domain::Bool, {}, true},
                                          {"norm", Domain::Bool, {}, false}};
  static const std::vector<ParamRule> knn{
      {"n_neighbors", Domain::PositiveInt, {}, 10},
      {"weights", Domain::Choice, {"uniform", "distance"}, "distance"},
      {"algorithm", Domain::Choice, {"auto", "ball_tree", "kd_tree", "brute"}, "kd_tree"},
      {"leaf_size", Domain::PositiveInt, {}, 10},
      {"p", Domain::AtLeastOne, {}, 1},
      {"metric", Domain::Choice, {"minkowski"}, "minkowski"}};
  static const std::vector<ParamRule> dt{
      {"criterion", Domain::Choice, {"gini", "entropy"}, "gini"},
      {"splitter", Domain::Choice, {"best", "random"}, "best"},
      {"class_weight", Domain::Choice, {json(), "balanced"}, json()},
      {"max_features", Domain::Choice, {json(), "sqrt", "log2"}, "sqrt"},
      {"max_depth", Domain::OptionalPositiveInt, {}, 100},
      {"min_samples_split", Domain::Positive, {}, 0.01},
      {"min_samples_leaf", Domain::Positive, {}, 1}};
  static const std::vector<ParamRule> rf{
      {"n_estimators", Domain::PositiveInt, {}, 250},
      {"criterion", Domain::Choice, {"gini", "entropy"}, "gini"},
      {"class_weight", Domain::Choice, {json(), "balanced"}, json()},
      {"max_features", Domain::Choice, {json(), "sqrt", "log2"}, "sqrt"},
      {"max_depth", Domain::OptionalPositiveInt, {}, 50},
      {"min_samples_split", Domain::Positive, {}, 0.001},
      {"min_samples_leaf", Domain::Positive, {}, 0.0001}};
  switch (a) {
    case Algorithm::MNB: return nb;
    case Algorithm::CNB: return cnb;
    case Algorithm::KNN: return knn;
    case Algorithm::DT: return dt;
    case Algorithm::RF: return rf;
  }
  return rf;
}

inline bool is_integer(const nlohmann::json& v) {
  if (v.is_number_integer()) return true;
  return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
}

inline bool accepts(const ParamRule& r, const nlohmann::json& v) {
  switch (r.domain) {
    case Domain::NonNegative: return v.is_number() && v.get<double>() >= 0.0;
    case Domain::Positive: return v.is_number() && v.get<double>() > 0.0;
    case Domain::AtLeastOne: return v.is_number() && v.get<double>() >= 1.0;
    case Domain::PositiveInt: return is_integer(v) && v.get<double>() >= 1.0;
    case Domain::OptionalPositiveInt: return v.is_null() || (is_integer(v) && v.get<double>() >= 1.0);
    case Domain::Bool: return v.is_boolean();
    case Domain::Choice: return std::find(r.choices.begin(), r.choices.end(), v) != r.choices.end();
  }
  return false;
}

}  // namespace detail

/// Algorithm plus a complete, validated hyperparameter map.
struct ModelSpec {
  Algorithm algorithm = Algorithm::RF;
  Hyperparameters params;

  /// Fills unspecified hyperparameters with the tuned defaults and rejects
  /// unknown names or out-of-domain values.
  static ModelSpec make(Algorithm a, const Hyperparameters& given = {}) {
    ModelSpec s{a, {}};
    const auto& rules = detail::rules_for(a);
    for (const auto& [name, value] : given) {
      auto it = std::find_if(rules.begin(), rules.end(), [&](const detail::ParamRule& r) { return name == r.name; });
      if (it == rules.end()) throw InputError("unknown hyperparameter '" + name + "' for " + to_string(a));
      if (!detail::accepts(*it, value))
        throw InputError("invalid value " + value.dump() + " for hyperparameter '" + name + "' of " + to_string(a));
    }
    for (const auto& r : rules) {
      auto it = given.find(r.name);
      s.params[r.name] = it != given.end() ? it->second : r.default_value;
    }
    return s;
  }

  const nlohmann::json& at(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw Error("hyperparameter '" + name + "' missing from spec");
    return it->second;
  }
  double number(const std::string& name) const { return at(name).get<double>(); }
  std::size_t count(const std::string& name) const { return static_cast<std::size_t>(at(name).get<double>()); }
  bool flag(const std::string& name) const { return at(name).get<bool>(); }
  std::string choice(const std::string& name) const { return at(name).is_null() ? "" : at(name).get<std::string>(); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(algorithm);
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["hyperparameters"] = std::move(p);
    return j;
  }

  static ModelSpec from_json(const nlohmann::json& j) {
    Hyperparameters h;
    if (j.contains("hyperparameters"))
      for (auto it = j.at("hyperparameters").begin(); it != j.at("hyperparameters").end(); ++it) h[it.key()] = it.value();
    return make(parse_algorithm(j.at("algorithm").get<std::string>()), h);
  }

  bool operator==(const ModelSpec&) const = default;
};

/// Predicted label plus per-category scores in [0, 1] (absent classes score 0).
struct Prediction {
  Category label = Category::Other;
  Scores scores{};
};

/// Index of the largest value; ties go to the earliest category.
inline std::size_t argmax(const Scores& s) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (s[k] > s[best]) best = k;
  return best;
}

/// Classes present in `y`, in category order.
inline std::vector<Category> present_classes(const std::vector<Category>& y) {
  std::array<bool, kNumCategories> seen{};
  for (Category c : y) seen[index_of(c)] = true;
  std::vector<Category> out;
  for (Category c : kAllCategories)
    if (seen[index_of(c)]) out.push_back(c);
  return out;
}

/// Shape checks shared by every trainer; returns the feature dimension.
inline std::size_t check_training_set(const Matrix& X, const std::vector<Category>& y) {
  if (X.empty()) throw InputError("empty training set");
  if (X.size() != y.size()) throw InputError("feature matrix and label counts differ");
  const std::size_t d = X.front().size();
  for (const auto& row : X)
    if (row.size() != d) throw InputError("ragged feature matrix");
  if (present_classes(y).size() < 2) throw InputError("training labels contain a single class");
  return d;
}

/// A trained, immutable classifier. predict is pure and thread-safe.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const ModelSpec& spec() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Prediction predict(const Vector& x) const = 0;
  /// Learned parameters only; the caller stores the ModelSpec alongside.
  virtual nlohmann::json parameters() const = 0;

 protected:
  void check_dimension(const Vector& x) const {
    if (x.size() != dimension())
      throw InputError("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                       std::to_string(dimension()));
  }
};

}  // namespace credscore::classify
