#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "credscore/features.hpp"
#include "credscore/preprocess.hpp"
#include "credscore/vectorizer.hpp"

namespace credscore {

/// Features 1-13 with emotion and POS expanded into one slot each.
inline constexpr std::size_t kNumScalarFeatures = 23;

/// Machine keys for the scalar slots, in their frozen order.
inline const std::array<std::string, kNumScalarFeatures>& scalar_feature_keys() {
  static const std::array<std::string, kNumScalarFeatures> keys{
      "emotion_anger", "emotion_fear", "emotion_happiness", "emotion_sadness", "emotion_surprise",
      "complex_words", "fre", "hashtags", "mer", "neg_num", "neg_per", "polarity",
      "pos_adjectives", "pos_adverbs", "pos_auxiliaries", "pos_determiners", "pos_nouns", "pos_pronouns",
      "pos_punctuation", "pos_num", "pos_per", "reading_time_ms", "word_count"};
  return keys;
}

/// Human-readable names used in explanations.
inline const std::array<std::string, kNumScalarFeatures>& scalar_display_names() {
  static const std::array<std::string, kNumScalarFeatures> names{
      "Emotion (anger)", "Emotion (fear)", "Emotion (happiness)", "Emotion (sadness)", "Emotion (surprise)",
      "Complex word counter", "FRE", "Hashtag counter", "MER", "Neg. num.", "Neg. per.", "Polarity",
      "POS distributions (adjectives)", "POS distributions (adverbs)", "POS distributions (auxiliaries)",
      "POS distributions (determiners)", "POS distributions (nouns)", "POS distributions (pronouns)",
      "POS distributions (punctuation)", "Pos. num.", "Pos. per.", "Reading time", "Word count"};
  return names;
}

struct ScalarFeatures {
  std::array<bool, kNumEmotions> emotions{};
  double complex_words = 0;
  double fre = 0;
  double hashtags = 0;
  double mer = 0;
  double neg_num = 0;
  double neg_per = 0;
  int polarity = 0;
  std::array<double, kNumPosClasses> pos_dist{};
  double pos_num = 0;
  double pos_per = 0;
  double reading_time_ms = 0;
  double word_count = 0;

  std::array<double, kNumScalarFeatures> to_array() const {
    std::array<double, kNumScalarFeatures> a{};
    std::size_t i = 0;
    for (bool e : emotions) a[i++] = e ? 1.0 : 0.0;
    a[i++] = complex_words;
    a[i++] = fre;
    a[i++] = hashtags;
    a[i++] = mer;
    a[i++] = neg_num;
    a[i++] = neg_per;
    a[i++] = polarity;
    for (double p : pos_dist) a[i++] = p;
    a[i++] = pos_num;
    a[i++] = pos_per;
    a[i++] = reading_time_ms;
    a[i++] = word_count;
    return a;
  }
};

/// Textual blocks, in order: char n-grams, word n-grams, char n-grams inside
/// word boundaries.
enum class TextBlock { Char = 0, Word = 1, CharWb = 2 };
inline constexpr std::size_t kNumTextBlocks = 3;
inline constexpr std::array<const char*, kNumTextBlocks> kTextBlockPrefixes{"char", "word", "char_wb"};

struct FeatureVector {
  ScalarFeatures scalars;
  std::array<SparseCounts, kNumTextBlocks> counts;
};

struct FeatureOptions {
  FleschCoefficients flesch;
  bool currency_words = false;
};

/// The fitted vocabularies plus everything needed to map a post into one
/// flat, fixed-order vector.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(std::array<Vocabulary, kNumTextBlocks> vocabs, FeatureOptions options = {})
      : vocabs_(std::move(vocabs)), options_(options) {}

  const Vocabulary& vocabulary(TextBlock b) const { return vocabs_[static_cast<std::size_t>(b)]; }
  const FeatureOptions& options() const { return options_; }

  std::size_t dimension() const {
    std::size_t d = kNumScalarFeatures;
    for (const auto& v : vocabs_) d += v.size();
    return d;
  }

  std::size_t block_offset(TextBlock b) const {
    std::size_t off = kNumScalarFeatures;
    for (std::size_t i = 0; i < static_cast<std::size_t>(b); ++i) off += vocabs_[i].size();
    return off;
  }

  /// Frozen feature names: scalar keys, then `char:`, `word:`, `char_wb:` terms.
  std::vector<std::string> feature_names() const {
    std::vector<std::string> names(scalar_feature_keys().begin(), scalar_feature_keys().end());
    for (std::size_t b = 0; b < kNumTextBlocks; ++b)
      for (const auto& t : vocabs_[b].terms()) names.push_back(std::string(kTextBlockPrefixes[b]) + ":" + t);
    return names;
  }

  /// Block of a flat index, or nullopt for scalar slots.
  std::optional<TextBlock> block_of(std::size_t index) const {
    if (index < kNumScalarFeatures) return std::nullopt;
    for (std::size_t b = 0; b < kNumTextBlocks; ++b) {
      auto tb = static_cast<TextBlock>(b);
      if (index < block_offset(tb) + vocabs_[b].size()) return tb;
    }
    throw Error("feature index out of range");
  }

  /// Term behind a textual flat index.
  const std::string& term_at(std::size_t index) const {
    auto b = block_of(index);
    if (!b) throw Error("feature index is scalar");
    return vocabs_[static_cast<std::size_t>(*b)].terms()[index - block_offset(*b)];
  }

  std::vector<double> dense(const FeatureVector& fv) const {
    std::vector<double> x(dimension(), 0.0);
    auto s = fv.scalars.to_array();
    std::copy(s.begin(), s.end(), x.begin());
    for (std::size_t b = 0; b < kNumTextBlocks; ++b) {
      std::size_t off = block_offset(static_cast<TextBlock>(b));
      for (const auto& [col, n] : fv.counts[b]) {
        if (col >= vocabs_[b].size()) throw Error("sparse index outside vocabulary");
        x[off + col] = n;
      }
    }
    return x;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["currency_words"] = options_.currency_words;
    j["flesch"] = {options_.flesch.base, options_.flesch.per_sentence, options_.flesch.per_syllable};
    for (std::size_t b = 0; b < kNumTextBlocks; ++b) j["vocabularies"][kTextBlockPrefixes[b]] = vocabs_[b].to_json();
    return j;
  }

  static FeatureSpace from_json(const nlohmann::json& j) {
    FeatureOptions o;
    o.currency_words = j.at("currency_words").get<bool>();
    o.flesch = {j.at("flesch").at(0).get<double>(), j.at("flesch").at(1).get<double>(),
                j.at("flesch").at(2).get<double>()};
    std::array<Vocabulary, kNumTextBlocks> v;
    for (std::size_t b = 0; b < kNumTextBlocks; ++b) v[b] = Vocabulary::from_json(j.at("vocabularies").at(kTextBlockPrefixes[b]));
    return FeatureSpace(std::move(v), o);
  }

 private:
  std::array<Vocabulary, kNumTextBlocks> vocabs_;
  FeatureOptions options_;
};

struct FeatureSpaceConfig {
  VectorizerConfig char_grams = VectorizerConfig::tuned_char();
  VectorizerConfig word_grams = VectorizerConfig::tuned_word();
  VectorizerConfig char_wb_grams = VectorizerConfig::tuned_char_wb();
  FeatureOptions options;
};

/// Fits the three vocabularies on the cleaned (lemmatized) texts.
inline FeatureSpace fit_feature_space(const std::vector<CleanPost>& posts, const FeatureSpaceConfig& cfg = {}) {
  std::vector<std::string> docs;
  docs.reserve(posts.size());
  for (const auto& p : posts) docs.push_back(p.clean_text);
  return FeatureSpace({fit_vectorizer(docs, cfg.char_grams), fit_vectorizer(docs, cfg.word_grams),
                       fit_vectorizer(docs, cfg.char_wb_grams)},
                      cfg.options);
}

/// Scalar features and count blocks for one post. Readability scores that
/// are undefined for the post (no words) are reported as 0.
inline FeatureVector build_feature_vector(std::string_view raw_text, const CleanPost& post, const FeatureSpace& space,
                                          const AffectLexicon& affect = default_affect_lexicon(),
                                          const PosTagger& tagger = default_pos_tagger()) {
  FeatureVector fv;
  ScalarFeatures& s = fv.scalars;
  Affect a = annotate_affect(post.tokens, affect);
  s.emotions = a.emotions;
  s.polarity = a.polarity;
  s.complex_words = static_cast<double>(complex_word_count(post.tokens));
  s.word_count = static_cast<double>(word_count(post.tokens));
  try {
    s.fre = flesch_reading_ease(post.stripped_text, space.options().flesch);
  } catch (const InputError&) {
    s.fre = 0.0;
  }
  try {
    s.mer = mcalpine_eflaw(post.stripped_text);
  } catch (const InputError&) {
    s.mer = 0.0;
  }
  s.hashtags = static_cast<double>(count_hashtags(raw_text));
  SignedQuantities q = count_signed_quantities(raw_text, space.options().currency_words);
  s.pos_num = static_cast<double>(q.pos_num);
  s.neg_num = static_cast<double>(q.neg_num);
  s.pos_per = static_cast<double>(q.pos_per);
  s.neg_per = static_cast<double>(q.neg_per);
  s.pos_dist = pos_distribution(surface_tokens(post.stripped_text), tagger);
  s.reading_time_ms = reading_time_ms(post.stripped_text);
  for (std::size_t b = 0; b < kNumTextBlocks; ++b)
    fv.counts[b] = vectorize(post.clean_text, space.vocabulary(static_cast<TextBlock>(b)));
  return fv;
}

}  // namespace credscore
