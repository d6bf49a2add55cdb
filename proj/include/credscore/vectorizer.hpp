#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "credscore/error.hpp"
#include "credscore/unicode.hpp"

namespace credscore {

/// How a document is cut into n-grams.
///  - Word: whitespace tokens joined by single spaces.
///  - Char: code-point n-grams over the whitespace-normalized document.
///  - CharWb: code-point n-grams inside each space-padded word only.
enum class NgramMode { Char, Word, CharWb };

inline std::string to_string(NgramMode m) {
  switch (m) {
    case NgramMode::Char: return "char";
    case NgramMode::Word: return "word";
    case NgramMode::CharWb: return "char_wb";
  }
  return "char";
}

inline NgramMode parse_ngram_mode(std::string_view s) {
  if (s == "char") return NgramMode::Char;
  if (s == "word") return NgramMode::Word;
  if (s == "char_wb") return NgramMode::CharWb;
  throw InputError("unknown n-gram mode '" + std::string(s) + "'");
}

struct VectorizerConfig {
  NgramMode mode = NgramMode::Word;
  std::size_t ngram_lo = 1;
  std::size_t ngram_hi = 1;
  double min_df = 0.01;
  double max_df = 1.0;
  std::optional<std::size_t> max_features;

  /// Tuned defaults for the three textual feature blocks.
  static VectorizerConfig tuned_char() { return {NgramMode::Char, 3, 4, 0.03, 0.40, std::nullopt}; }
  static VectorizerConfig tuned_word() { return {NgramMode::Word, 1, 1, 0.01, 0.23, std::nullopt}; }
  static VectorizerConfig tuned_char_wb() { return {NgramMode::CharWb, 3, 5, 0.02, 0.26, std::nullopt}; }

  void validate() const {
    if (ngram_lo < 1 || ngram_lo > ngram_hi) throw InputError("invalid ngram_range");
    if (!(min_df > 0.0 && min_df < max_df && max_df <= 1.0))
      throw InputError("document frequency bounds must satisfy 0 < min_df < max_df <= 1");
    if (max_features && *max_features == 0) throw InputError("max_features must be positive");
  }

  friend bool operator==(const VectorizerConfig&, const VectorizerConfig&) = default;
};

/// All n-grams of `doc` (with repetition) in extraction order.
inline std::vector<std::string> analyze(std::string_view doc, NgramMode mode, std::size_t lo, std::size_t hi) {
  std::vector<std::string> grams;
  switch (mode) {
    case NgramMode::Word: {
      auto toks = unicode::split_whitespace(doc);
      for (std::size_t n = lo; n <= hi && n <= toks.size(); ++n) {
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
          std::string g = toks[i];
          for (std::size_t j = 1; j < n; ++j) g += " " + toks[i + j];
          grams.push_back(std::move(g));
        }
      }
      break;
    }
    case NgramMode::Char: {
      std::u32string text = unicode::to_u32(unicode::collapse_whitespace(doc));
      for (std::size_t n = lo; n <= hi && n <= text.size(); ++n)
        for (std::size_t i = 0; i + n <= text.size(); ++i) grams.push_back(unicode::from_u32(text.substr(i, n)));
      break;
    }
    case NgramMode::CharWb: {
      for (const auto& word : unicode::split_whitespace(doc)) {
        std::u32string w = U" " + unicode::to_u32(word) + U" ";
        for (std::size_t n = lo; n <= hi; ++n) {
          std::size_t offset = 0;
          grams.push_back(unicode::from_u32(w.substr(offset, n)));
          while (offset + n < w.size()) {
            ++offset;
            grams.push_back(unicode::from_u32(w.substr(offset, n)));
          }
          if (offset == 0) break;  // word shorter than n: counted once
        }
      }
      break;
    }
  }
  return grams;
}

/// Sorted (column, count) pairs.
using SparseCounts = std::vector<std::pair<std::size_t, std::uint32_t>>;

/// Fitted term -> column map. Columns follow lexicographic term order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(VectorizerConfig config, std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n_docs)
      : config_(std::move(config)), terms_(std::move(terms)), df_(std::move(df)), n_docs_(n_docs) {
    for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
  }

  const VectorizerConfig& config() const { return config_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& document_frequencies() const { return df_; }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t size() const { return terms_.size(); }

  std::optional<std::size_t> column(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["mode"] = to_string(config_.mode);
    j["ngram_range"] = {config_.ngram_lo, config_.ngram_hi};
    j["min_df"] = config_.min_df;
    j["max_df"] = config_.max_df;
    j["max_features"] = config_.max_features ? nlohmann::ordered_json(*config_.max_features) : nlohmann::ordered_json();
    j["n_docs"] = n_docs_;
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    nlohmann::ordered_json df = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      vocab[terms_[i]] = i;
      df[terms_[i]] = df_[i];
    }
    j["vocabulary"] = std::move(vocab);
    j["df"] = std::move(df);
    return j;
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    VectorizerConfig c;
    c.mode = parse_ngram_mode(j.at("mode").get<std::string>());
    c.ngram_lo = j.at("ngram_range").at(0).get<std::size_t>();
    c.ngram_hi = j.at("ngram_range").at(1).get<std::size_t>();
    c.min_df = j.at("min_df").get<double>();
    c.max_df = j.at("max_df").get<double>();
    if (!j.at("max_features").is_null()) c.max_features = j.at("max_features").get<std::size_t>();
    const auto& vocab = j.at("vocabulary");
    std::vector<std::string> terms(vocab.size());
    std::vector<std::size_t> df(vocab.size(), 0);
    for (auto it = vocab.begin(); it != vocab.end(); ++it) {
      std::size_t col = it.value().get<std::size_t>();
      if (col >= terms.size()) throw InputError("vocabulary column out of range");
      terms[col] = it.key();
      df[col] = j.at("df").at(it.key()).get<std::size_t>();
    }
    return Vocabulary(c, std::move(terms), std::move(df), j.at("n_docs").get<std::size_t>());
  }

 private:
  VectorizerConfig config_;
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::size_t n_docs_ = 0;
  std::map<std::string, std::size_t> index_;
};

/// Keeps n-grams whose document-frequency fraction lies in [min_df, max_df];
/// with max_features, only the most frequent (corpus count, ties by term).
inline Vocabulary fit_vectorizer(const std::vector<std::string>& corpus, const VectorizerConfig& config) {
  config.validate();
  if (corpus.empty()) throw InputError("cannot fit a vectorizer on an empty corpus");
  struct Stat {
    std::size_t df = 0;
    std::size_t total = 0;
    std::size_t last_doc = static_cast<std::size_t>(-1);
  };
  std::map<std::string, Stat> stats;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (auto& g : analyze(corpus[d], config.mode, config.ngram_lo, config.ngram_hi)) {
      Stat& s = stats[std::move(g)];
      ++s.total;
      if (s.last_doc != d) {
        ++s.df;
        s.last_doc = d;
      }
    }
  }
  const double n = static_cast<double>(corpus.size());
  std::vector<std::pair<std::string, Stat>> kept;
  for (auto& [term, s] : stats) {
    double frac = static_cast<double>(s.df) / n;
    if (frac >= config.min_df && frac <= config.max_df) kept.emplace_back(term, s);
  }
  if (config.max_features && kept.size() > *config.max_features) {
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second.total != b.second.total) return a.second.total > b.second.total;
      return a.first < b.first;
    });
    kept.resize(*config.max_features);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  if (kept.empty())
    throw InputError("empty " + to_string(config.mode) +
                     " vocabulary: no n-gram has a document frequency within [min_df, max_df]; widen the bounds");
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  for (auto& [term, s] : kept) {
    terms.push_back(term);
    df.push_back(s.df);
  }
  return Vocabulary(config, std::move(terms), std::move(df), corpus.size());
}

/// Per-term occurrence counts; out-of-vocabulary grams are ignored.
inline SparseCounts vectorize(std::string_view text, const Vocabulary& vocab) {
  const auto& c = vocab.config();
  std::map<std::size_t, std::uint32_t> counts;
  for (const auto& g : analyze(text, c.mode, c.ngram_lo, c.ngram_hi))
    if (auto col = vocab.column(g)) ++counts[*col];
  return SparseCounts(counts.begin(), counts.end());
}

}  // namespace credscore
