#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "credscore/csv.hpp"
#include "credscore/date.hpp"
#include "credscore/error.hpp"
#include "credscore/patterns.hpp"
#include "credscore/unicode.hpp"

namespace credscore {

// ---------------------------------------------------------------------------
// Categories

/// Forecast category. The declaration order is the tie-break order used
/// everywhere (Drop < Rise < Other).
enum class Category { Drop = 0, Rise = 1, Other = 2 };

inline constexpr std::array<Category, 3> kAllCategories{Category::Drop, Category::Rise, Category::Other};
inline constexpr std::size_t kNumCategories = 3;

inline constexpr std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }

inline std::string to_string(Category c) {
  switch (c) {
    case Category::Drop: return "drop";
    case Category::Rise: return "rise";
    case Category::Other: return "other";
  }
  return "other";
}

/// Human-facing name used in explanations.
inline std::string display_name(Category c) {
  switch (c) {
    case Category::Drop: return "short-term drop";
    case Category::Rise: return "short-term rise";
    case Category::Other: return "other";
  }
  return "other";
}

inline std::optional<Category> parse_category(std::string_view s) {
  std::string t = unicode::to_lower(s);
  if (t == "drop" || t == "short-term drop" || t == "shorttermdrop") return Category::Drop;
  if (t == "rise" || t == "short-term rise" || t == "shorttermrise") return Category::Rise;
  if (t == "other") return Category::Other;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Posts

struct Post {
  std::string id;
  std::string advisor_id;
  Timestamp published_at;
  std::string text;
  std::vector<std::string> cashtags;
  std::vector<std::string> hashtags;

  friend bool operator==(const Post&, const Post&) = default;
};

struct LabeledPost {
  Post post;
  std::optional<Category> label;

  friend bool operator==(const LabeledPost&, const LabeledPost&) = default;
};

using PostCollection = std::vector<LabeledPost>;

namespace detail {

inline std::vector<std::string> dedup_upper(const std::vector<std::string>& matches, std::size_t strip) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& m : matches) {
    std::string sym = unicode::to_upper(std::string_view(m).substr(strip));
    if (seen.insert(sym).second) out.push_back(std::move(sym));
  }
  return out;
}

inline std::vector<std::string> scan_cashtags(std::string_view text) {
  return dedup_upper(patterns::any_ticker().find_all(text), 1);
}

inline std::vector<std::string> scan_hashtags(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& m : patterns::hashtag().find_all(text)) {
    std::string tag = m.substr(1);
    if (seen.insert(tag).second) out.push_back(std::move(tag));
  }
  return out;
}

inline std::string require_string(const nlohmann::json& rec, const char* key, std::size_t line_no) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) throw InputError("line " + std::to_string(line_no) + ": missing " + key);
  if (!it->is_string())
    throw InputError("line " + std::to_string(line_no) + ": field " + key + " must be a string");
  return it->get<std::string>();
}

inline std::vector<std::string> optional_string_list(const nlohmann::json& rec, const char* key,
                                                     std::size_t line_no) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return {};
  if (!it->is_array()) throw InputError("line " + std::to_string(line_no) + ": field " + key + " must be a list");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string())
      throw InputError("line " + std::to_string(line_no) + ": field " + key + " must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Parses posts in JSON-lines form. Blank lines are skipped; line numbers in
/// errors are 1-based physical lines.
inline PostCollection parse_posts(std::istream& in) {
  PostCollection posts;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) throw InputError("line " + std::to_string(line_no) + ": record is not an object");

    LabeledPost lp;
    Post& p = lp.post;
    p.id = detail::require_string(rec, "id", line_no);
    p.advisor_id = detail::require_string(rec, "advisor_id", line_no);
    std::string when = detail::require_string(rec, "published_at", line_no);
    try {
      p.published_at = parse_timestamp(when);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
    p.text = detail::require_string(rec, "text", line_no);
    if (csv::trim(p.text).empty()) throw InputError("line " + std::to_string(line_no) + ": empty text");
    if (rec.contains("cashtags"))
      p.cashtags = detail::optional_string_list(rec, "cashtags", line_no);
    else
      p.cashtags = detail::scan_cashtags(p.text);
    if (rec.contains("hashtags"))
      p.hashtags = detail::optional_string_list(rec, "hashtags", line_no);
    else
      p.hashtags = detail::scan_hashtags(p.text);

    if (auto it = rec.find("label"); it != rec.end() && !it->is_null()) {
      if (!it->is_string()) throw InputError("line " + std::to_string(line_no) + ": label must be a string");
      lp.label = parse_category(it->get<std::string>());
      if (!lp.label)
        throw InputError("line " + std::to_string(line_no) + ": unknown label '" + it->get<std::string>() +
                         "' (expected rise|drop|other)");
    }
    if (!ids.insert(p.id).second)
      throw InputError("line " + std::to_string(line_no) + ": duplicate id '" + p.id + "'");
    posts.push_back(std::move(lp));
  }
  return posts;
}

inline PostCollection load_posts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open posts file '" + path + "'");
  try {
    return parse_posts(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline nlohmann::ordered_json post_to_json(const LabeledPost& lp) {
  nlohmann::ordered_json j;
  j["id"] = lp.post.id;
  j["advisor_id"] = lp.post.advisor_id;
  j["published_at"] = format_timestamp(lp.post.published_at);
  j["text"] = lp.post.text;
  j["cashtags"] = lp.post.cashtags;
  j["hashtags"] = lp.post.hashtags;
  if (lp.label) j["label"] = to_string(*lp.label);
  return j;
}

inline void write_posts(std::ostream& out, const PostCollection& posts) {
  for (const auto& lp : posts) out << post_to_json(lp).dump() << '\n';
}

inline void save_posts(const std::string& path, const PostCollection& posts) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_posts(out, posts);
}

// ---------------------------------------------------------------------------
// Prices

struct PriceBar {
  Date date;
  double open = 0, high = 0, low = 0, close = 0;

  friend bool operator==(const PriceBar&, const PriceBar&) = default;
};

/// Daily bars for one ticker, strictly increasing by date.
struct PriceSeries {
  std::string ticker;
  std::vector<PriceBar> bars;

  /// Last bar dated on or before `d`, if any.
  const PriceBar* last_on_or_before(const Date& d) const {
    auto it = std::upper_bound(bars.begin(), bars.end(), d,
                               [](const Date& x, const PriceBar& b) { return x < b.date; });
    if (it == bars.begin()) return nullptr;
    return &*std::prev(it);
  }

  std::optional<Date> last_date() const {
    if (bars.empty()) return std::nullopt;
    return bars.back().date;
  }
};

/// Validates bar invariants; `row` is used in the message.
inline void validate_bar(const PriceBar& b, std::size_t row) {
  auto fail = [&](const std::string& what) { throw InputError("row " + std::to_string(row) + ": " + what); };
  if (b.low > b.high) fail("low>high");
  if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0)) fail("prices must be strictly positive");
  if (b.low > std::min(b.open, b.close)) fail("low above open/close");
  if (b.high < std::max(b.open, b.close)) fail("high below open/close");
}

/// Sorts bars by date and rejects duplicates. Throws on invariant violations.
inline PriceSeries make_series(std::string ticker, std::vector<PriceBar> bars) {
  for (std::size_t i = 0; i < bars.size(); ++i) validate_bar(bars[i], i + 1);
  std::stable_sort(bars.begin(), bars.end(), [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < bars.size(); ++i)
    if (bars[i].date == bars[i - 1].date)
      throw InputError("duplicate date " + format_date(bars[i].date) + " in series " + ticker);
  return PriceSeries{std::move(ticker), std::move(bars)};
}

/// Parses `date,open,high,low,close` CSV text. Rows are numbered from 1
/// starting at the first data row. Extra columns are ignored.
inline PriceSeries parse_price_csv(std::istream& in, const std::string& ticker) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!csv::trim(line).empty()) {
      header = csv::split_line(csv::trim(line));
      break;
    }
  }
  if (header.empty()) throw InputError("price CSV for " + ticker + " is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[unicode::to_lower(csv::trim(header[i]))] = i;
  for (const char* need : {"date", "open", "high", "low", "close"})
    if (!col.count(need)) throw InputError(std::string("price CSV header lacks column '") + need + "'");

  std::vector<PriceBar> bars;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    ++row;
    auto f = csv::split_line(csv::trim(line));
    std::string ctx = "row " + std::to_string(row);
    if (f.size() < header.size()) throw InputError(ctx + ": expected " + std::to_string(header.size()) + " fields");
    PriceBar b;
    try {
      b.date = parse_date(csv::trim(f[col["date"]]));
    } catch (const InputError& e) {
      throw InputError(ctx + ": " + e.what());
    }
    b.open = csv::parse_number(f[col["open"]], ctx);
    b.high = csv::parse_number(f[col["high"]], ctx);
    b.low = csv::parse_number(f[col["low"]], ctx);
    b.close = csv::parse_number(f[col["close"]], ctx);
    validate_bar(b, row);
    bars.push_back(b);
  }
  return make_series(unicode::to_upper(ticker), std::move(bars));
}

inline PriceSeries load_price_csv(const std::string& path, const std::string& ticker) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open price file '" + path + "'");
  try {
    return parse_price_csv(in, ticker);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Ticker dictionaries

/// Splits text into lowercase alphanumeric words; every other code point
/// acts as a separator. Used both for dictionary keys and for lookups so that
/// "Banco Santander", "#SANTANDER" and "santander" normalize consistently.
inline std::vector<std::string> alias_words(std::string_view text) {
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : unicode::to_u32(unicode::to_lower(text))) {
    if (unicode::is_alnum(c)) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(unicode::from_u32(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(unicode::from_u32(cur));
  return out;
}

inline std::string alias_key(std::string_view alias) {
  std::string key;
  for (const auto& w : alias_words(alias)) {
    if (!key.empty()) key.push_back(' ');
    key += w;
  }
  return key;
}

/// Alias -> canonical ticker. Lookup is case-insensitive; canonical tickers
/// are stored uppercase.
class TickerDictionary {
 public:
  void add(std::string_view alias, std::string_view ticker) {
    std::string key = alias_key(alias);
    if (key.empty()) return;
    std::string sym = unicode::to_upper(csv::trim(ticker));
    if (sym.empty()) throw InputError("empty ticker for alias '" + std::string(alias) + "'");
    max_words_ = std::max(max_words_, static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ') + 1));
    entries_[std::move(key)] = std::move(sym);
  }

  std::optional<std::string> lookup(std::string_view alias) const {
    auto it = entries_.find(alias_key(alias));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t max_alias_words() const { return max_words_; }

 private:
  std::map<std::string, std::string> entries_;
  std::size_t max_words_ = 0;
};

/// Reads an `alias,ticker` CSV into `dict`, overriding existing aliases.
inline void read_ticker_csv(std::istream& in, TickerDictionary& dict, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = csv::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto f = csv::split_line(t);
    if (f.size() < 2) throw InputError(source + ": line " + std::to_string(line_no) + ": expected alias,ticker");
    if (line_no == 1 && unicode::to_lower(csv::trim(f[0])) == "alias" &&
        unicode::to_lower(csv::trim(f[1])) == "ticker")
      continue;
    dict.add(csv::trim(f[0]), csv::trim(f[1]));
  }
}

/// Merges the given dictionaries; later files win on alias collisions.
inline TickerDictionary load_ticker_dictionary(const std::vector<std::string>& paths) {
  if (paths.empty()) throw InputError("no ticker dictionary files given");
  TickerDictionary dict;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open ticker dictionary '" + path + "'");
    read_ticker_csv(in, dict, path);
  }
  return dict;
}

// ---------------------------------------------------------------------------
// Social metrics

/// Account statistics of one advisor. Values are stored exactly as given:
/// average above maximum is accepted.
struct SocialMetrics {
  std::string advisor_id;
  double followers = 0;
  double retweets_avg = 0, retweets_max = 0;
  double likes_avg = 0, likes_max = 0;
  double replies_avg = 0, replies_max = 0;

  friend bool operator==(const SocialMetrics&, const SocialMetrics&) = default;
};

inline constexpr std::array<const char*, 8> kSocialMetricColumns{
    "advisor_id", "followers", "retweets_avg", "retweets_max", "likes_avg", "likes_max", "replies_avg", "replies_max"};

inline std::vector<SocialMetrics> parse_social_metrics(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line))
    if (!csv::trim(line).empty()) {
      header = csv::split_line(csv::trim(line));
      break;
    }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[unicode::to_lower(csv::trim(header[i]))] = i;
  for (const char* need : kSocialMetricColumns)
    if (!col.count(need)) throw InputError(std::string("social metrics header lacks column '") + need + "'");

  std::vector<SocialMetrics> out;
  std::set<std::string> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    ++row;
    auto f = csv::split_line(csv::trim(line));
    std::string ctx = "row " + std::to_string(row);
    if (f.size() < header.size()) throw InputError(ctx + ": expected " + std::to_string(header.size()) + " fields");
    SocialMetrics m;
    m.advisor_id = csv::trim(f[col["advisor_id"]]);
    auto num = [&](const char* name) {
      double v = csv::parse_number(f[col[name]], ctx + " " + name);
      if (v < 0) throw InputError(ctx + ": " + name + " must be >= 0");
      return v;
    };
    m.followers = num("followers");
    m.retweets_avg = num("retweets_avg");
    m.retweets_max = num("retweets_max");
    m.likes_avg = num("likes_avg");
    m.likes_max = num("likes_max");
    m.replies_avg = num("replies_avg");
    m.replies_max = num("replies_max");
    if (!seen.insert(m.advisor_id).second) throw InputError(ctx + ": duplicate advisor '" + m.advisor_id + "'");
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<SocialMetrics> load_social_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open social metrics file '" + path + "'");
  try {
    return parse_social_metrics(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace credscore
