#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "credscore/corpus.hpp"
#include "credscore/csv.hpp"
#include "credscore/patterns.hpp"
#include "credscore/resources.hpp"
#include "credscore/unicode.hpp"

namespace credscore {

// ---------------------------------------------------------------------------
// Ticker extraction

/// `$TICKER` and `^TICKER` symbols, sign stripped, uppercased, first
/// occurrence order, no duplicates.
inline std::vector<std::string> extract_cashtags(std::string_view text) { return detail::scan_cashtags(text); }

/// Dictionary aliases found as whole words (a `#` prefix is just a word
/// boundary). Multi-word aliases match the longest run first.
inline std::vector<std::string> detect_dictionary_tickers(std::string_view text, const TickerDictionary& dict) {
  std::vector<std::string> out;
  if (dict.empty()) return out;
  std::unordered_set<std::string> seen;
  auto words = alias_words(text);
  const auto& entries = dict.entries();
  std::size_t max_n = dict.max_alias_words();
  for (std::size_t i = 0; i < words.size();) {
    std::size_t matched = 0;
    for (std::size_t n = std::min(max_n, words.size() - i); n >= 1 && matched == 0; --n) {
      std::string key = words[i];
      for (std::size_t j = 1; j < n; ++j) key += " " + words[i + j];
      if (auto it = entries.find(key); it != entries.end()) {
        if (seen.insert(it->second).second) out.push_back(it->second);
        matched = n;
      }
    }
    i += matched ? matched : 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cleaning

/// Removes link/image references and special characters, then collapses
/// whitespace. Idempotent.
inline std::string strip_noise(std::string_view text) {
  std::string s = patterns::links().replace_all(text, "");
  s = patterns::special_chars().replace_all(s, "");
  return unicode::collapse_whitespace(s);
}

/// Lowercase, NFKD-decomposed, restricted to letters and digits. Combining
/// marks and symbols (emoji) are dropped; punctuation acts as a separator.
inline std::string fold_text(std::string_view text) {
  std::string lowered = unicode::nfkd(unicode::to_lower(unicode::nfkd(text)));
  std::u32string out;
  for (char32_t c : unicode::to_u32(lowered)) {
    if (unicode::is_alnum(c))
      out.push_back(c);
    else if (unicode::is_space(c) || unicode::is_punct(c))
      out.push_back(U' ');
  }
  return unicode::from_u32(out);
}

class Stopwords {
 public:
  Stopwords() = default;
  explicit Stopwords(const std::vector<std::string>& words) {
    for (const auto& w : words)
      for (auto& folded : unicode::split_whitespace(fold_text(w))) words_.insert(std::move(folded));
  }

  bool contains(const std::string& folded_token) const { return words_.count(folded_token) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

inline Stopwords parse_stopwords(std::string_view content) {
  std::vector<std::string> words;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    std::string w = csv::trim(line);
    if (!w.empty() && w[0] != '#') words.push_back(w);
  }
  return Stopwords(words);
}

inline Stopwords load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stopword list '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_stopwords(ss.str());
}

inline const Stopwords& spanish_stopwords() {
  static const Stopwords sw = parse_stopwords(resources::kSpanishStopwords);
  return sw;
}

/// Folds, splits on whitespace and drops stop words. Does not deduplicate.
inline std::vector<std::string> normalize_and_tokenize(std::string_view text, const Stopwords& stopwords) {
  std::vector<std::string> out;
  for (auto& tok : unicode::split_whitespace(fold_text(text)))
    if (!stopwords.contains(tok)) out.push_back(std::move(tok));
  return out;
}

// ---------------------------------------------------------------------------
// Lemmatization

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemma(const std::string& token) const = 0;

  std::vector<std::string> lemmatize(const std::vector<std::string>& tokens) const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lemma(t));
    return out;
  }
};

struct SuffixRule {
  std::string suffix;
  std::string replacement;
};

/// Exceptions dictionary first, then the first matching suffix rule whose
/// remaining stem keeps at least `min_stem` bytes. Anything else passes
/// through unchanged.
class RuleLemmatizer final : public Lemmatizer {
 public:
  RuleLemmatizer(std::unordered_map<std::string, std::string> exceptions, std::vector<SuffixRule> rules,
                 std::size_t min_stem = 3)
      : exceptions_(std::move(exceptions)), rules_(std::move(rules)), min_stem_(min_stem) {}

  std::string lemma(const std::string& token) const override {
    if (auto it = exceptions_.find(token); it != exceptions_.end()) return it->second;
    for (const auto& r : rules_) {
      if (token.size() >= r.suffix.size() + min_stem_ &&
          token.compare(token.size() - r.suffix.size(), r.suffix.size(), r.suffix) == 0)
        return token.substr(0, token.size() - r.suffix.size()) + r.replacement;
    }
    return token;
  }

  const std::vector<SuffixRule>& rules() const { return rules_; }

 private:
  std::unordered_map<std::string, std::string> exceptions_;
  std::vector<SuffixRule> rules_;
  std::size_t min_stem_;
};

inline std::unordered_map<std::string, std::string> parse_lemma_exceptions(std::string_view content) {
  std::unordered_map<std::string, std::string> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = csv::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto f = csv::split_line(t);
    if (f.size() != 2) throw InputError("lemma exceptions line " + std::to_string(line_no) + ": expected form,lemma");
    if (line_no == 1 && csv::trim(f[0]) == "form") continue;
    out[csv::trim(f[0])] = csv::trim(f[1]);
  }
  return out;
}

/// Accepts `suffix→replacement` or `suffix->replacement` per line.
inline std::vector<SuffixRule> parse_suffix_rules(std::string_view content) {
  std::vector<SuffixRule> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = csv::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t pos = t.find("→");
    std::size_t sep_len = std::string_view("→").size();
    if (pos == std::string::npos) {
      pos = t.find("->");
      sep_len = 2;
    }
    if (pos == std::string::npos || pos == 0)
      throw InputError("suffix rules line " + std::to_string(line_no) + ": expected suffix→replacement");
    out.push_back({csv::trim(t.substr(0, pos)), csv::trim(t.substr(pos + sep_len))});
  }
  return out;
}

inline std::shared_ptr<const Lemmatizer> default_lemmatizer() {
  static const auto lem = std::make_shared<const RuleLemmatizer>(
      parse_lemma_exceptions(resources::kLemmaExceptions), parse_suffix_rules(resources::kSuffixRules));
  return lem;
}

inline std::shared_ptr<const Lemmatizer> load_lemmatizer(const std::string& exceptions_path,
                                                         const std::string& rules_path) {
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot open '" + p + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return std::make_shared<const RuleLemmatizer>(parse_lemma_exceptions(slurp(exceptions_path)),
                                                parse_suffix_rules(slurp(rules_path)));
}

inline std::vector<std::string> lemmatize(const std::vector<std::string>& tokens, const Lemmatizer& lem) {
  return lem.lemmatize(tokens);
}

// ---------------------------------------------------------------------------
// Pipeline

struct CleanPost {
  std::string post_id;
  std::vector<std::string> tickers;
  std::vector<std::string> tokens;
  /// Lemmas joined by single spaces; input to the n-gram vectorizers.
  std::string clean_text;
  /// Link/special-char free surface text, still cased and punctuated.
  std::string stripped_text;
};

/// Fixed order: cashtags, dictionary tickers, noise removal, folding and
/// tokenization, lemmatization.
class Preprocessor {
 public:
  Preprocessor(std::shared_ptr<const TickerDictionary> dict = nullptr, Stopwords stopwords = spanish_stopwords(),
               std::shared_ptr<const Lemmatizer> lemmatizer = default_lemmatizer())
      : dict_(std::move(dict)), stopwords_(std::move(stopwords)), lemmatizer_(std::move(lemmatizer)) {}

  CleanPost run(std::string_view post_id, std::string_view text) const {
    CleanPost cp;
    cp.post_id = std::string(post_id);
    cp.tickers = extract_cashtags(text);
    if (dict_) {
      for (auto& t : detect_dictionary_tickers(text, *dict_))
        if (std::find(cp.tickers.begin(), cp.tickers.end(), t) == cp.tickers.end()) cp.tickers.push_back(std::move(t));
    }
    cp.stripped_text = strip_noise(text);
    for (auto& lemma : lemmatizer_->lemmatize(normalize_and_tokenize(cp.stripped_text, stopwords_)))
      if (!lemma.empty() && !stopwords_.contains(lemma)) cp.tokens.push_back(std::move(lemma));
    for (const auto& t : cp.tokens) {
      if (!cp.clean_text.empty()) cp.clean_text.push_back(' ');
      cp.clean_text += t;
    }
    return cp;
  }

  CleanPost run(const Post& p) const { return run(p.id, p.text); }

  const Stopwords& stopwords() const { return stopwords_; }

 private:
  std::shared_ptr<const TickerDictionary> dict_;
  Stopwords stopwords_;
  std::shared_ptr<const Lemmatizer> lemmatizer_;
};

}  // namespace credscore
