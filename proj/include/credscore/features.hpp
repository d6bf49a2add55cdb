#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "credscore/csv.hpp"
#include "credscore/error.hpp"
#include "credscore/patterns.hpp"
#include "credscore/preprocess.hpp"
#include "credscore/resources.hpp"
#include "credscore/unicode.hpp"

namespace credscore {

// ---------------------------------------------------------------------------
// Readability

/// Classic Flesch coefficients; swap in Fernández-Huerta or others here.
struct FleschCoefficients {
  double base = 206.835;
  double per_sentence = 1.015;
  double per_syllable = 84.6;
};

inline constexpr double kReadingMsPerChar = 14.69;

inline bool is_vowel(char32_t c) {
  switch (c) {
    case U'a': case U'e': case U'i': case U'o': case U'u':
    case U'á': case U'é': case U'í': case U'ó': case U'ú': case U'ü':
    case U'A': case U'E': case U'I': case U'O': case U'U':
    case U'Á': case U'É': case U'Í': case U'Ó': case U'Ú': case U'Ü':
      return true;
    default:
      return false;
  }
}

/// Maximal vowel groups, at least 1 for any non-empty word.
inline std::size_t count_syllables(std::string_view word) {
  std::size_t groups = 0;
  bool in_group = false;
  bool any = false;
  for (char32_t c : unicode::to_u32(word)) {
    any = true;
    bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  if (!any) return 0;
  return groups == 0 ? 1 : groups;
}

struct TextCounts {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t miniwords = 0;
};

/// Words are whitespace pieces trimmed of surrounding punctuation that still
/// contain a letter or digit. A sentence ends at a piece whose trailing
/// punctuation includes `.`, `!` or `?`; trailing words form a final sentence.
inline TextCounts count_text(std::string_view text) {
  TextCounts tc;
  bool pending = false;
  for (const auto& piece : unicode::split_whitespace(text)) {
    std::u32string cps = unicode::to_u32(piece);
    std::size_t b = 0, e = cps.size();
    while (b < e && !unicode::is_alnum(cps[b])) ++b;
    while (e > b && !unicode::is_alnum(cps[e - 1])) --e;
    if (e > b) {
      std::u32string word = cps.substr(b, e - b);
      ++tc.words;
      tc.syllables += count_syllables(unicode::from_u32(word));
      if (word.size() <= 3) ++tc.miniwords;
      pending = true;
    }
    bool ends = false;
    for (std::size_t i = e; i < cps.size(); ++i)
      if (cps[i] == U'.' || cps[i] == U'!' || cps[i] == U'?') ends = true;
    if (ends && pending) {
      ++tc.sentences;
      pending = false;
    }
  }
  if (pending) ++tc.sentences;
  return tc;
}

inline double flesch_from_counts(double words, double sentences, double syllables,
                                 const FleschCoefficients& k = {}) {
  return k.base - k.per_sentence * (words / sentences) - k.per_syllable * (syllables / words);
}

inline double flesch_reading_ease(std::string_view text, const FleschCoefficients& k = {}) {
  TextCounts tc = count_text(text);
  if (tc.words == 0) throw InputError("empty text");
  return flesch_from_counts(static_cast<double>(tc.words), static_cast<double>(tc.sentences),
                            static_cast<double>(tc.syllables), k);
}

/// McAlpine EFLAW: (words + mini-words) / sentences, mini-word = up to 3 chars.
inline double mcalpine_eflaw(std::string_view text) {
  TextCounts tc = count_text(text);
  if (tc.sentences == 0) throw InputError("empty text: no sentences");
  return static_cast<double>(tc.words + tc.miniwords) / static_cast<double>(tc.sentences);
}

inline double reading_time_ms(std::string_view text) {
  std::u32string cps = unicode::to_u32(text);
  std::size_t b = 0, e = cps.size();
  while (b < e && unicode::is_space(cps[b])) ++b;
  while (e > b && unicode::is_space(cps[e - 1])) --e;
  return static_cast<double>(e - b) * kReadingMsPerChar;
}

inline std::size_t complex_word_count(const std::vector<std::string>& tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens)
    if (count_syllables(t) >= 3) ++n;
  return n;
}

inline std::size_t word_count(const std::vector<std::string>& tokens) { return tokens.size(); }

// ---------------------------------------------------------------------------
// Regex counters (run on the raw text, before noise removal)

struct SignedQuantities {
  std::size_t pos_num = 0;
  std::size_t neg_num = 0;
  std::size_t pos_per = 0;
  std::size_t neg_per = 0;

  friend bool operator==(const SignedQuantities&, const SignedQuantities&) = default;
};

/// Percent amounts feed the percentage counters, currency amounts the numeric
/// ones; a leading '-' makes them negative. With `currency_words`, amounts
/// followed by a spelled-out currency ("4.54 euros") count as numeric too.
inline SignedQuantities count_signed_quantities(std::string_view text, bool currency_words = false) {
  SignedQuantities q;
  for (const auto& m : patterns::signed_quantity().find_all(text)) {
    bool negative = m.front() == '-';
    bool percent = m.back() == '%';
    if (percent)
      ++(negative ? q.neg_per : q.pos_per);
    else
      ++(negative ? q.neg_num : q.pos_num);
  }
  if (currency_words) {
    for (const auto& m : patterns::signed_quantity_currency_word().find_all(text)) ++(m.front() == '-' ? q.neg_num : q.pos_num);
  }
  return q;
}

inline std::size_t count_hashtags(std::string_view text) { return patterns::hashtag().count(text); }

// ---------------------------------------------------------------------------
// Affect

enum class Emotion { Anger = 0, Fear, Happiness, Sadness, Surprise };
inline constexpr std::size_t kNumEmotions = 5;
inline constexpr std::array<const char*, kNumEmotions> kEmotionNames{"anger", "fear", "happiness", "sadness",
                                                                      "surprise"};

struct AffectEntry {
  std::array<bool, kNumEmotions> emotions{};
  double sentiment = 0.0;
};

class AffectLexicon {
 public:
  void add(const std::string& word, AffectEntry entry) { entries_[word] = entry; }
  const AffectEntry* find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, AffectEntry> entries_;
};

/// `word,emotion_tags,sentiment` with `|`-separated tags. Words are folded
/// the same way as post tokens.
inline AffectLexicon parse_affect_lexicon(std::string_view content) {
  AffectLexicon lex;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = csv::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto f = csv::split_line(t);
    std::string ctx = "affect lexicon line " + std::to_string(line_no);
    if (f.size() != 3) throw InputError(ctx + ": expected word,emotion_tags,sentiment");
    if (line_no == 1 && csv::trim(f[0]) == "word") continue;
    AffectEntry e;
    std::string tags = csv::trim(f[1]);
    std::size_t start = 0;
    while (start <= tags.size() && !tags.empty()) {
      std::size_t bar = tags.find('|', start);
      std::string tag = csv::trim(tags.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
      if (!tag.empty()) {
        bool found = false;
        for (std::size_t i = 0; i < kNumEmotions; ++i)
          if (tag == kEmotionNames[i]) e.emotions[i] = found = true;
        if (!found) throw InputError(ctx + ": unknown emotion '" + tag + "'");
      }
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    e.sentiment = csv::parse_number(f[2], ctx);
    for (const auto& w : unicode::split_whitespace(fold_text(csv::trim(f[0])))) lex.add(w, e);
  }
  return lex;
}

inline AffectLexicon load_affect_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open affect lexicon '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_affect_lexicon(ss.str());
}

inline const AffectLexicon& default_affect_lexicon() {
  static const AffectLexicon lex = parse_affect_lexicon(resources::kAffectLexicon);
  return lex;
}

struct Affect {
  std::array<bool, kNumEmotions> emotions{};
  int polarity = 0;

  friend bool operator==(const Affect&, const Affect&) = default;
};

/// Emotion flag set iff some token carries the tag; polarity is the sign of
/// the summed sentiment.
inline Affect annotate_affect(const std::vector<std::string>& tokens, const AffectLexicon& lex) {
  Affect a;
  double total = 0.0;
  for (const auto& t : tokens) {
    if (const AffectEntry* e = lex.find(t)) {
      for (std::size_t i = 0; i < kNumEmotions; ++i) a.emotions[i] = a.emotions[i] || e->emotions[i];
      total += e->sentiment;
    }
  }
  a.polarity = total > 0 ? 1 : (total < 0 ? -1 : 0);
  return a;
}

inline Affect annotate_affect(std::string_view text, const AffectLexicon& lex) {
  return annotate_affect(unicode::split_whitespace(fold_text(text)), lex);
}

// ---------------------------------------------------------------------------
// Part-of-speech distribution

enum class PosClass { Adjective = 0, Adverb, Auxiliary, Determiner, Noun, Pronoun, Punctuation, Other };
inline constexpr std::size_t kNumPosClasses = 7;
inline constexpr std::array<const char*, kNumPosClasses> kPosClassNames{
    "adjectives", "adverbs", "auxiliaries", "determiners", "nouns", "pronouns", "punctuation"};

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual PosClass tag(const std::string& token) const = 0;
};

/// Closed-class lookup for auxiliaries, determiners, pronouns, common
/// adverbs and adjectives; suffix heuristics for open-class adverbs and
/// adjectives; punctuation by character class; everything else is a noun.
class DictionaryPosTagger final : public PosTagger {
 public:
  DictionaryPosTagger(std::string_view lexicon_csv, std::string_view adjective_suffixes,
                      std::string_view adverb_suffixes) {
    std::istringstream in{std::string(lexicon_csv)};
    std::string line;
    while (std::getline(in, line)) {
      auto f = csv::split_line(csv::trim(line));
      if (f.size() != 2 || f[0] == "class") continue;
      std::string cls = csv::trim(f[0]);
      std::string word = fold_text(csv::trim(f[1]));
      word = csv::trim(word);
      PosClass pc;
      if (cls == "aux") pc = PosClass::Auxiliary;
      else if (cls == "det") pc = PosClass::Determiner;
      else if (cls == "pron") pc = PosClass::Pronoun;
      else if (cls == "adv") pc = PosClass::Adverb;
      else if (cls == "adj") pc = PosClass::Adjective;
      else throw InputError("unknown POS class '" + cls + "'");
      // first listing wins
      words_.emplace(word, pc);
    }
    adjective_suffixes_ = unicode::split_whitespace(adjective_suffixes);
    adverb_suffixes_ = unicode::split_whitespace(adverb_suffixes);
  }

  PosClass tag(const std::string& token) const override {
    if (token.empty()) return PosClass::Other;
    std::u32string cps = unicode::to_u32(token);
    bool all_punct = true;
    for (char32_t c : cps) all_punct = all_punct && unicode::is_punct(c);
    if (all_punct) return PosClass::Punctuation;
    if (auto it = words_.find(token); it != words_.end()) return it->second;
    if (has_suffix(token, adverb_suffixes_)) return PosClass::Adverb;
    if (has_suffix(token, adjective_suffixes_)) return PosClass::Adjective;
    return PosClass::Noun;
  }

 private:
  static bool has_suffix(const std::string& token, const std::vector<std::string>& suffixes) {
    for (const auto& s : suffixes)
      if (token.size() >= s.size() + 3 && token.compare(token.size() - s.size(), s.size(), s) == 0) return true;
    return false;
  }

  std::unordered_map<std::string, PosClass> words_;
  std::vector<std::string> adjective_suffixes_;
  std::vector<std::string> adverb_suffixes_;
};

inline const PosTagger& default_pos_tagger() {
  static const DictionaryPosTagger tagger(resources::kPosLexicon, resources::kAdjectiveSuffixes,
                                          resources::kAdverbSuffixes);
  return tagger;
}

/// Folded words plus one token per punctuation mark; emoji and other
/// symbols are dropped.
inline std::vector<std::string> surface_tokens(std::string_view text) {
  std::string folded = unicode::nfkd(unicode::to_lower(unicode::nfkd(text)));
  std::vector<std::string> out;
  std::u32string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(unicode::from_u32(cur));
    cur.clear();
  };
  for (char32_t c : unicode::to_u32(folded)) {
    if (unicode::is_alnum(c)) {
      cur.push_back(c);
    } else if (unicode::is_punct(c)) {
      flush();
      out.push_back(unicode::from_u32(c));
    } else if (u_getCombiningClass(static_cast<UChar32>(c)) != 0 || u_charType(static_cast<UChar32>(c)) == U_NON_SPACING_MARK) {
      continue;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

/// Percentage of tokens per class (adjectives, adverbs, auxiliaries,
/// determiners, nouns, pronouns, punctuation). Empty input gives zeros.
inline std::array<double, kNumPosClasses> pos_distribution(const std::vector<std::string>& tokens,
                                                            const PosTagger& tagger = default_pos_tagger()) {
  std::array<double, kNumPosClasses> dist{};
  if (tokens.empty()) return dist;
  std::array<std::size_t, kNumPosClasses> counts{};
  for (const auto& t : tokens) {
    PosClass pc = tagger.tag(t);
    if (pc != PosClass::Other) ++counts[static_cast<std::size_t>(pc)];
  }
  for (std::size_t i = 0; i < kNumPosClasses; ++i)
    dist[i] = static_cast<double>(counts[i]) / static_cast<double>(tokens.size()) * 100.0;
  return dist;
}

}  // namespace credscore
