#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "credscore/corpus.hpp"
#include "credscore/error.hpp"

namespace credscore {

struct LexiconTerm {
  std::string term;
  std::size_t freq = 0;
  bool operator==(const LexiconTerm&) const = default;
};

/// Per-category unique-term lexica, each ordered by frequency then term.
class CategoryLexicons {
 public:
  CategoryLexicons() = default;

  const std::vector<LexiconTerm>& terms(Category c) const { return terms_[index_of(c)]; }

  void set(Category c, std::vector<LexiconTerm> terms) {
    terms_[index_of(c)] = std::move(terms);
    index_.clear();
    for (Category k : kAllCategories)
      for (const auto& t : terms_[index_of(k)]) {
        if (!index_.emplace(t.term, k).second)
          throw InputError("lexicon term '" + t.term + "' appears in more than one category");
      }
  }

  std::optional<Category> category_of(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Category> empty_categories() const {
    std::vector<Category> out;
    for (Category c : kAllCategories)
      if (terms_[index_of(c)].empty()) out.push_back(c);
    return out;
  }

  std::size_t total_size() const { return index_.size(); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (Category c : kAllCategories) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& t : terms(c)) arr.push_back({{"term", t.term}, {"freq", t.freq}});
      j[to_string(c)] = std::move(arr);
    }
    return j;
  }

  static CategoryLexicons from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("lexicons: expected an object");
    CategoryLexicons lex;
    for (auto it = j.begin(); it != j.end(); ++it) {
      auto c = parse_category(it.key());
      if (!c) throw InputError("lexicons: unknown category '" + it.key() + "'");
      std::vector<LexiconTerm> ts;
      for (const auto& e : it.value()) ts.push_back({e.at("term").get<std::string>(), e.at("freq").get<std::size_t>()});
      lex.set(*c, std::move(ts));
    }
    return lex;
  }

 private:
  std::array<std::vector<LexiconTerm>, kNumCategories> terms_;
  std::map<std::string, Category> index_;
};

/// Tokens of one training post with its category.
using LabeledTokens = std::pair<std::vector<std::string>, Category>;

/// Keeps, per category, the most frequent `fraction` of terms that never
/// occur in posts of another category (rounded up).
inline CategoryLexicons induce_lexicons(const std::vector<LabeledTokens>& corpus, double fraction = 0.10) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("lexicon fraction must lie in (0, 1]");
  std::array<std::size_t, kNumCategories> posts{};
  // term -> per-category total frequency
  std::map<std::string, std::array<std::size_t, kNumCategories>> freq;
  for (const auto& [tokens, cat] : corpus) {
    ++posts[index_of(cat)];
    for (const auto& t : tokens) ++freq[t][index_of(cat)];
  }
  for (Category c : kAllCategories)
    if (posts[index_of(c)] == 0) throw InputError("lexicon induction: no posts labeled '" + to_string(c) + "'");

  std::array<std::vector<LexiconTerm>, kNumCategories> candidates;
  for (const auto& [term, counts] : freq) {
    std::size_t owners = 0, owner = 0;
    for (std::size_t k = 0; k < kNumCategories; ++k)
      if (counts[k] > 0) ++owners, owner = k;
    if (owners == 1) candidates[owner].push_back({term, counts[owner]});
  }

  CategoryLexicons lex;
  for (Category c : kAllCategories) {
    auto& cand = candidates[index_of(c)];
    std::sort(cand.begin(), cand.end(), [](const LexiconTerm& a, const LexiconTerm& b) {
      return a.freq != b.freq ? a.freq > b.freq : a.term < b.term;
    });
    auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(cand.size()) - 1e-9));
    cand.resize(std::min(keep, cand.size()));
    lex.set(c, std::move(cand));
  }
  return lex;
}

struct LexiconMatch {
  Category category;
  std::vector<std::string> terms;  // sorted, distinct
};

/// The category whose lexicon shares the most distinct terms with `tokens`;
/// none when nothing matches or the best count is tied.
inline std::optional<LexiconMatch> match_lexicon(const std::vector<std::string>& tokens, const CategoryLexicons& lex) {
  std::array<std::set<std::string>, kNumCategories> hits;
  for (const auto& t : tokens)
    if (auto c = lex.category_of(t)) hits[index_of(*c)].insert(t);
  std::size_t best = 0, best_count = 0;
  bool tied = false;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (hits[k].size() > best_count) {
      best = k, best_count = hits[k].size(), tied = false;
    } else if (hits[k].size() == best_count && best_count > 0) {
      tied = true;
    }
  }
  if (best_count == 0 || tied) return std::nullopt;
  return LexiconMatch{kAllCategories[best], {hits[best].begin(), hits[best].end()}};
}

inline void save_lexicons(const std::string& path, const CategoryLexicons& lex) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << lex.to_json().dump(2) << '\n';
}

inline CategoryLexicons load_lexicons(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return CategoryLexicons::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace credscore
