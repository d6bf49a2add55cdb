#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "credscore/classify/hybrid.hpp"
#include "credscore/classify/model.hpp"
#include "credscore/csv.hpp"
#include "credscore/feature_vector.hpp"

namespace credscore::explain {

using classify::Vector;

/// Perturbed copies of one point. masks[s][a] tells whether active feature
/// `a` (the a-th non-zero entry of x) was kept in sample s.
struct Perturbations {
  std::vector<std::size_t> active;
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<Vector> samples;
};

inline constexpr std::size_t kMinSamples = 50;

/// The first sample is x itself; every other one keeps each active feature
/// with probability 1/2 and zeroes the rest.
inline Perturbations perturb(const Vector& x, std::size_t n, std::uint64_t seed) {
  if (n < kMinSamples) throw InputError("perturbation needs at least " + std::to_string(kMinSamples) + " samples");
  Perturbations p;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) p.active.push_back(i);
  if (p.active.empty()) throw InputError("nothing to perturb");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(0.5);
  p.masks.reserve(n);
  p.samples.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::uint8_t> mask(p.active.size(), 1);
    if (s > 0)
      for (auto& m : mask) m = keep(rng) ? 1 : 0;
    Vector sample = x;
    for (std::size_t a = 0; a < mask.size(); ++a)
      if (!mask[a]) sample[p.active[a]] = 0.0;
    p.masks.push_back(std::move(mask));
    p.samples.push_back(std::move(sample));
  }
  return p;
}

struct SurrogateOptions {
  std::optional<double> kernel_width;  // default 0.75 * sqrt(active features)
  double ridge = 1e-3;
};

inline double default_kernel_width(std::size_t active) { return 0.75 * std::sqrt(static_cast<double>(active)); }

/// Weighted ridge regression of `targets` on the masks with an unpenalized
/// intercept. Sample weights exp(-d^2 / width^2), d the fraction of features
/// removed, are normalized to sum to 1. Returns one coefficient per mask column.
inline Vector fit_surrogate(const std::vector<std::vector<std::uint8_t>>& masks, const Vector& targets,
                            const SurrogateOptions& opt = {}) {
  if (masks.empty() || masks.size() != targets.size()) throw InputError("surrogate needs one target per mask");
  const std::size_t n = masks.size(), m = masks.front().size();
  const double width = opt.kernel_width.value_or(default_kernel_width(m));
  if (!(width > 0.0)) throw InputError("kernel width must be positive");
  if (opt.ridge < 0.0) throw InputError("ridge penalty must be non-negative");

  Eigen::MatrixXd Z(n, m);
  Eigen::VectorXd t(n), w(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (masks[s].size() != m) throw InputError("ragged mask set");
    std::size_t removed = 0;
    for (std::size_t a = 0; a < m; ++a) {
      Z(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = masks[s][a];
      removed += masks[s][a] == 0;
    }
    const double d = static_cast<double>(removed) / static_cast<double>(m);
    w(static_cast<Eigen::Index>(s)) = std::exp(-d * d / (width * width));
    t(static_cast<Eigen::Index>(s)) = targets[s];
  }
  w /= w.sum();
  const Eigen::RowVectorXd zbar = w.transpose() * Z;
  const double tbar = w.dot(t);
  Eigen::MatrixXd Zc = Z.rowwise() - zbar;
  Eigen::VectorXd tc = t.array() - tbar;
  Eigen::MatrixXd A = Zc.transpose() * w.asDiagonal() * Zc;
  A.diagonal().array() += opt.ridge;
  Eigen::VectorXd beta = A.ldlt().solve(Zc.transpose() * (w.asDiagonal() * tc));
  return Vector(beta.data(), beta.data() + beta.size());
}

struct Attribution {
  std::size_t index = 0;  // flat feature index
  std::string name;
  double weight = 0.0;
};

struct TopFeatures {
  std::vector<Attribution> items;
  bool all_zero = false;
};

/// The k largest by |weight|; equal magnitudes keep feature order.
inline TopFeatures top_features(std::vector<Attribution> attributions, std::size_t k = 5) {
  for (const auto& a : attributions)
    if (!std::isfinite(a.weight)) throw InputError("attribution weight is not finite");
  std::stable_sort(attributions.begin(), attributions.end(), [](const Attribution& a, const Attribution& b) {
    if (std::abs(a.weight) != std::abs(b.weight)) return std::abs(a.weight) > std::abs(b.weight);
    return a.index < b.index;
  });
  TopFeatures r;
  r.all_zero = std::all_of(attributions.begin(), attributions.end(), [](const Attribution& a) { return a.weight == 0.0; });
  attributions.resize(std::min(k, attributions.size()));
  r.items = std::move(attributions);
  return r;
}

using WordFrequencies = std::map<std::string, std::size_t>;

inline WordFrequencies word_frequencies(const std::vector<std::vector<std::string>>& token_lists) {
  WordFrequencies f;
  for (const auto& toks : token_lists)
    for (const auto& t : toks) ++f[t];
  return f;
}

/// Most frequent word containing `gram`, ties going to the smaller word; the
/// gram itself when no word contains it.
inline std::string chargram_to_word(const std::string& gram, const WordFrequencies& freq) {
  const std::string* best = nullptr;
  std::size_t best_n = 0;
  for (const auto& [word, n] : freq) {
    if (word.find(gram) == std::string::npos) continue;
    if (!best || n > best_n) best = &word, best_n = n;
  }
  return best ? *best : gram;
}

/// Python list repr of strings: ['a', 'b'].
inline std::string python_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    const std::string& s = items[i];
    const char q = s.find('\'') != std::string::npos && s.find('"') == std::string::npos ? '"' : '\'';
    out += q;
    for (char c : s) {
      if (c == '\\' || c == q) out += '\\';
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out += c;
    }
    out += q;
  }
  return out + "]";
}

/// Two sentences: the main one with <tweet>, <category> and <terms>, and an
/// optional one with <features>, dropped when there are no features.
struct ExplanationTemplate {
  std::string main =
      "The classification of the post \"<tweet>\" as <category> can be explained by the presence of these terms: "
      "<terms>.";
  std::string features = "Additionally, the process considered the following features: <features>.";

  /// First line is the main sentence, second line the features sentence.
  static ExplanationTemplate load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open template '" + path + "'");
    ExplanationTemplate t;
    if (!std::getline(in, t.main)) throw InputError(path + ": empty template");
    if (!std::getline(in, t.features)) t.features.clear();
    for (auto* s : {&t.main, &t.features})
      if (!s->empty() && s->back() == '\r') s->pop_back();
    if (t.main.find("<tweet>") == std::string::npos || t.main.find("<category>") == std::string::npos)
      throw InputError(path + ": main sentence needs <tweet> and <category>");
    return t;
  }
};

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

inline std::string render(const std::string& tweet, Category category, const std::vector<std::string>& terms,
                          const std::vector<std::string>& features, const ExplanationTemplate& tpl = {}) {
  std::string text = tpl.main;
  // terms first so placeholders inside the tweet text are left alone
  text = replace_all(text, "<terms>", python_list(terms));
  text = replace_all(text, "<category>", display_name(category));
  text = replace_all(text, "<tweet>", tweet);
  if (!features.empty() && !tpl.features.empty()) text += " " + replace_all(tpl.features, "<features>", python_list(features));
  return text;
}

struct Explanation {
  std::string post_id;
  Category category = Category::Other;
  classify::Source source = classify::Source::Lexicon;
  std::vector<std::string> terms;
  std::vector<std::string> features;
  std::vector<Attribution> attributions;  // model stage only
  std::string text;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["post_id"] = post_id;
    j["category"] = to_string(category);
    j["source"] = classify::to_string(source);
    j["terms"] = terms;
    j["features"] = features;
    j["text"] = text;
    return j;
  }
};

struct ExplainOptions {
  std::size_t samples = 500;
  std::size_t top_k = 5;
  std::uint64_t seed = 0;
  SurrogateOptions surrogate;
};

/// Local attributions of the model's predicted-class score around x.
inline std::vector<Attribution> attribute(const classify::Classifier& model, const Vector& x,
                                          const std::vector<std::string>& feature_names, const ExplainOptions& opt) {
  const Category predicted = model.predict(x).label;
  Perturbations p = perturb(x, opt.samples, opt.seed);
  Vector targets;
  targets.reserve(p.samples.size());
  for (const auto& s : p.samples) targets.push_back(model.predict(s).scores[index_of(predicted)]);
  Vector beta = fit_surrogate(p.masks, targets, opt.surrogate);
  std::vector<Attribution> out;
  for (std::size_t a = 0; a < p.active.size(); ++a)
    out.push_back({p.active[a], p.active[a] < feature_names.size() ? feature_names[p.active[a]] : "", beta[a]});
  return out;
}

/// Human-readable label of a flat feature: display names for scalars, the
/// n-gram for word grams, and the containing word for char grams.
inline std::pair<bool, std::string> describe_feature(std::size_t index, const FeatureSpace& space,
                                                     const WordFrequencies& freq) {
  if (index < kNumScalarFeatures) return {false, scalar_display_names()[index]};
  auto block = space.block_of(index);
  std::string term = space.term_at(index);
  if (block == TextBlock::Word) return {true, term};
  std::string trimmed = csv::trim(term);
  if (trimmed.empty() || trimmed.find(' ') != std::string::npos) return {true, trimmed.empty() ? term : trimmed};
  return {true, chargram_to_word(trimmed, freq)};
}

/// Explains one hybrid classification. Lexicon results cite their matched
/// terms; model results run the surrogate and cite its strongest features.
inline Explanation explain_result(const std::string& post_id, const std::string& tweet,
                                  const classify::HybridResult& result, const classify::Classifier* model,
                                  const FeatureSpace& space, const WordFrequencies& freq, const ExplainOptions& opt,
                                  const ExplanationTemplate& tpl = {}) {
  Explanation e;
  e.post_id = post_id;
  e.category = result.category;
  e.source = result.source;
  if (result.source == classify::Source::Lexicon) {
    e.terms = result.matched_terms;
  } else {
    if (!model) throw Error("model-stage explanation needs the model");
    e.attributions = attribute(*model, result.features, space.feature_names(), opt);
    auto top = top_features(e.attributions, opt.top_k);
    auto add = [](std::vector<std::string>& list, const std::string& label) {
      if (std::find(list.begin(), list.end(), label) == list.end()) list.push_back(label);
    };
    for (const auto& a : top.items) {
      auto [textual, label] = describe_feature(a.index, space, freq);
      add(textual ? e.terms : e.features, label);
    }
    // without a textual feature in the top k, cite the strongest one anyway
    if (e.terms.empty()) {
      auto all = top_features(e.attributions, e.attributions.size());
      for (const auto& a : all.items)
        if (a.index >= kNumScalarFeatures) {
          add(e.terms, describe_feature(a.index, space, freq).second);
          break;
        }
    }
  }
  e.text = render(tweet, e.category, e.terms, e.features, tpl);
  return e;
}

}  // namespace credscore::explain
