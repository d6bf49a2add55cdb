#pragma once

#include "credscore/classify/model.hpp"
#include "credscore/lexicon.hpp"

namespace credscore::classify {

enum class Source { Lexicon, Model };

inline std::string to_string(Source s) { return s == Source::Lexicon ? "lexicon" : "ml"; }

struct HybridResult {
  Category category = Category::Other;
  Source source = Source::Lexicon;
  std::vector<std::string> matched_terms;  // lexicon stage evidence
  std::optional<Prediction> prediction;    // model stage output
  Vector features;                         // model stage input, kept for the explainer
};

/// Lexicon match first; only unmatched posts are featurized and sent to the
/// model. `featurize` is called lazily and returns the dense feature vector.
template <class Featurize>
HybridResult hybrid_classify(const std::vector<std::string>& tokens, const CategoryLexicons& lexicons,
                             const Classifier& model, Featurize&& featurize) {
  HybridResult r;
  if (auto m = match_lexicon(tokens, lexicons)) {
    r.category = m->category;
    r.source = Source::Lexicon;
    r.matched_terms = std::move(m->terms);
    return r;
  }
  r.source = Source::Model;
  r.features = featurize();
  r.prediction = model.predict(r.features);
  r.category = r.prediction->label;
  return r;
}

}  // namespace credscore::classify
