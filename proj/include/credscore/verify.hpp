#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "credscore/corpus.hpp"
#include "credscore/csv.hpp"
#include "credscore/date.hpp"
#include "credscore/error.hpp"

namespace credscore {

/// Decides which dates the exchange is open.
class TradingCalendar {
 public:
  virtual ~TradingCalendar() = default;
  virtual bool is_trading_day(const Date& d) const = 0;
};

/// Monday to Friday, no holidays.
class WeekdayCalendar : public TradingCalendar {
 public:
  bool is_trading_day(const Date& d) const override { return !is_weekend(d); }
};

/// Weekdays minus an explicit holiday list.
class HolidayCalendar : public TradingCalendar {
 public:
  explicit HolidayCalendar(std::set<Date> holidays) : holidays_(std::move(holidays)) {}
  bool is_trading_day(const Date& d) const override { return !is_weekend(d) && !holidays_.count(d); }
  const std::set<Date>& holidays() const { return holidays_; }

 private:
  std::set<Date> holidays_;
};

/// One ISO date per line; blank lines and `#` comments are ignored.
inline HolidayCalendar load_holiday_calendar(const std::string& path) {
  std::set<Date> days;
  std::size_t n = 0;
  for (const auto& raw : csv::read_lines(path)) {
    ++n;
    std::string line = csv::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    try {
      days.insert(parse_date(line));
    } catch (const InputError& e) {
      throw InputError(path + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return HolidayCalendar(std::move(days));
}

struct VerificationConfig {
  double threshold = 0.03;
  int window_weeks = 3;
  /// How far back the baseline close may come from when the publish date
  /// itself has no bar.
  int baseline_lookback_days = 14;
  /// Exchange UTC offset used to date posts; the post's own offset otherwise.
  std::optional<int> exchange_offset_minutes;
  std::shared_ptr<const TradingCalendar> calendar = std::make_shared<WeekdayCalendar>();

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("verification threshold must lie in (0, 1)");
    if (window_weeks < 1) throw InputError("verification window must be at least one week");
    if (baseline_lookback_days < 0) throw InputError("baseline lookback must be non-negative");
    if (!calendar) throw InputError("verification needs a trading calendar");
  }

  Date publish_date(const Timestamp& t) const {
    return exchange_offset_minutes ? t.date_at_offset(*exchange_offset_minutes) : t.local_date();
  }
};

/// The trading days among the window_weeks * 5 weekdays that follow the
/// publish date. Holidays shrink the window instead of extending it.
inline std::vector<Date> trading_window(const Date& publish, const VerificationConfig& cfg) {
  std::vector<Date> out;
  Date d = publish;
  for (int slots = 0; slots < cfg.window_weeks * 5;) {
    d = add_days(d, 1);
    if (is_weekend(d)) continue;
    ++slots;
    if (cfg.calendar->is_trading_day(d)) out.push_back(d);
  }
  return out;
}

enum class OutcomeStatus { Success, Failure, Indeterminate };

inline std::string to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::Success: return "success";
    case OutcomeStatus::Failure: return "failure";
    case OutcomeStatus::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

inline OutcomeStatus parse_outcome_status(std::string_view s) {
  if (s == "success") return OutcomeStatus::Success;
  if (s == "failure") return OutcomeStatus::Failure;
  if (s == "indeterminate") return OutcomeStatus::Indeterminate;
  throw InputError("unknown outcome status '" + std::string(s) + "'");
}

namespace reason {
inline constexpr const char* kNoBaseline = "no baseline";
inline constexpr const char* kNoWindowBars = "no price bars in window";
inline constexpr const char* kIncompleteWindow = "insufficient window data";
inline constexpr const char* kOtherCategory = "post classified as other";
inline constexpr const char* kNoTicker = "no ticker";
inline constexpr const char* kNoPriceData = "no price data for ticker";
}  // namespace reason

struct ForecastOutcome {
  std::string post_id;
  std::string advisor_id;
  std::string ticker;
  Category category = Category::Other;
  std::optional<double> baseline_close;
  std::optional<Date> trigger_date;
  OutcomeStatus status = OutcomeStatus::Indeterminate;
  std::string reason;  // set for indeterminate outcomes

  bool operator==(const ForecastOutcome&) const = default;
};

/// Checks a drop or rise forecast against daily bars. Drop succeeds when a
/// window low reaches baseline * (1 - t), rise when a window high reaches
/// baseline * (1 + t); the trigger is the first such bar. A window the series
/// does not fully cover without triggering is indeterminate.
inline ForecastOutcome verify_forecast(Category category, const PriceSeries& series, const Date& publish,
                                       const VerificationConfig& cfg) {
  cfg.validate();
  ForecastOutcome out;
  out.ticker = series.ticker;
  out.category = category;
  auto indeterminate = [&](const char* why) {
    out.status = OutcomeStatus::Indeterminate;
    out.reason = why;
    return out;
  };
  if (category == Category::Other) return indeterminate(reason::kOtherCategory);

  const PriceBar* base = series.last_on_or_before(publish);
  if (!base || std::chrono::sys_days{base->date} < std::chrono::sys_days{add_days(publish, -cfg.baseline_lookback_days)})
    return indeterminate(reason::kNoBaseline);
  const double b = base->close;
  out.baseline_close = b;

  const auto window = trading_window(publish, cfg);
  const std::set<Date> in_window(window.begin(), window.end());
  bool any = false;
  for (const auto& bar : series.bars) {
    if (!in_window.count(bar.date)) continue;
    any = true;
    bool hit = category == Category::Drop ? bar.low <= b * (1.0 - cfg.threshold) : bar.high >= b * (1.0 + cfg.threshold);
    if (hit) {
      out.status = OutcomeStatus::Success;
      out.trigger_date = bar.date;
      return out;
    }
  }
  if (!any) return indeterminate(reason::kNoWindowBars);
  if (!window.empty() && (!series.last_date() || *series.last_date() < window.back()))
    return indeterminate(reason::kIncompleteWindow);
  out.status = OutcomeStatus::Failure;
  return out;
}

/// Success ratios of one advisor. Qualities are absent without verified posts.
struct CredibilityRank {
  std::string advisor_id;
  std::size_t drop_verified = 0, drop_successes = 0;
  std::size_t rise_verified = 0, rise_successes = 0;
  std::size_t indeterminate = 0;
  std::optional<double> drop_quality, rise_quality, global_quality;
};

inline CredibilityRank assess_advisor(const std::string& advisor_id, const std::vector<ForecastOutcome>& outcomes) {
  CredibilityRank r;
  r.advisor_id = advisor_id;
  for (const auto& o : outcomes) {
    if (o.status == OutcomeStatus::Indeterminate) {
      ++r.indeterminate;
      continue;
    }
    bool ok = o.status == OutcomeStatus::Success;
    if (o.category == Category::Drop) {
      ++r.drop_verified;
      r.drop_successes += ok;
    } else if (o.category == Category::Rise) {
      ++r.rise_verified;
      r.rise_successes += ok;
    }
  }
  auto ratio = [](std::size_t s, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return static_cast<double>(s) / static_cast<double>(n);
  };
  r.drop_quality = ratio(r.drop_successes, r.drop_verified);
  r.rise_quality = ratio(r.rise_successes, r.rise_verified);
  r.global_quality = ratio(r.drop_successes + r.rise_successes, r.drop_verified + r.rise_verified);
  return r;
}

/// One rank per advisor, best global quality first (absent last, then by id).
/// Advisors in `known_advisors` are ranked even without outcomes.
inline std::vector<CredibilityRank> rank_advisors(const std::vector<ForecastOutcome>& outcomes,
                                                  const std::vector<std::string>& known_advisors = {}) {
  std::map<std::string, std::vector<ForecastOutcome>> by_advisor;
  for (const auto& id : known_advisors) by_advisor[id];
  for (const auto& o : outcomes) by_advisor[o.advisor_id].push_back(o);
  std::vector<CredibilityRank> ranks;
  for (const auto& [id, os] : by_advisor) ranks.push_back(assess_advisor(id, os));
  std::stable_sort(ranks.begin(), ranks.end(), [](const CredibilityRank& a, const CredibilityRank& b) {
    if (a.global_quality.has_value() != b.global_quality.has_value()) return a.global_quality.has_value();
    if (a.global_quality && *a.global_quality != *b.global_quality) return *a.global_quality > *b.global_quality;
    return a.advisor_id < b.advisor_id;
  });
  return ranks;
}

/// Percent with two decimals, or "NA".
inline std::string format_percent(const std::optional<double>& q) {
  if (!q) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *q * 100.0);
  return buf;
}

inline std::string ranks_to_csv(const std::vector<CredibilityRank>& ranks) {
  std::string out = "advisor,drop_quality_pct,rise_quality_pct,global_quality_pct,drop_verified,rise_verified,indeterminate\n";
  for (const auto& r : ranks)
    out += csv::quote(r.advisor_id) + "," + format_percent(r.drop_quality) + "," + format_percent(r.rise_quality) + "," +
           format_percent(r.global_quality) + "," + std::to_string(r.drop_verified) + "," +
           std::to_string(r.rise_verified) + "," + std::to_string(r.indeterminate) + "\n";
  return out;
}

inline nlohmann::ordered_json rank_to_json(const CredibilityRank& r) {
  auto opt = [](const std::optional<double>& q) { return q ? nlohmann::ordered_json(*q) : nlohmann::ordered_json(); };
  nlohmann::ordered_json j;
  j["advisor_id"] = r.advisor_id;
  j["drop_quality"] = opt(r.drop_quality);
  j["rise_quality"] = opt(r.rise_quality);
  j["global_quality"] = opt(r.global_quality);
  j["drop_verified"] = r.drop_verified;
  j["drop_successes"] = r.drop_successes;
  j["rise_verified"] = r.rise_verified;
  j["rise_successes"] = r.rise_successes;
  j["indeterminate"] = r.indeterminate;
  return j;
}

inline nlohmann::ordered_json outcome_to_json(const ForecastOutcome& o) {
  nlohmann::ordered_json j;
  j["post_id"] = o.post_id;
  j["advisor_id"] = o.advisor_id;
  j["ticker"] = o.ticker;
  j["category"] = to_string(o.category);
  j["status"] = to_string(o.status);
  j["baseline_close"] = o.baseline_close ? nlohmann::ordered_json(*o.baseline_close) : nlohmann::ordered_json();
  j["trigger_date"] = o.trigger_date ? nlohmann::ordered_json(format_date(*o.trigger_date)) : nlohmann::ordered_json();
  j["reason"] = o.reason;
  return j;
}

inline ForecastOutcome outcome_from_json(const nlohmann::json& j) {
  ForecastOutcome o;
  o.post_id = j.at("post_id").get<std::string>();
  o.advisor_id = j.at("advisor_id").get<std::string>();
  o.ticker = j.at("ticker").get<std::string>();
  auto c = parse_category(j.at("category").get<std::string>());
  if (!c) throw InputError("outcome: unknown category");
  o.category = *c;
  o.status = parse_outcome_status(j.at("status").get<std::string>());
  if (!j.at("baseline_close").is_null()) o.baseline_close = j.at("baseline_close").get<double>();
  if (!j.at("trigger_date").is_null()) o.trigger_date = parse_date(j.at("trigger_date").get<std::string>());
  o.reason = j.value("reason", "");
  return o;
}

inline void write_outcomes(std::ostream& out, const std::vector<ForecastOutcome>& outcomes) {
  for (const auto& o : outcomes) out << outcome_to_json(o).dump() << '\n';
}

inline std::vector<ForecastOutcome> read_outcomes(const std::string& path) {
  std::vector<ForecastOutcome> out;
  std::size_t n = 0;
  for (const auto& line : csv::read_lines(path)) {
    ++n;
    if (csv::trim(line).empty()) continue;
    try {
      out.push_back(outcome_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw InputError(path + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace credscore
