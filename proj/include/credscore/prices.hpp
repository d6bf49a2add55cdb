#pragma once

#include <cstdlib>
#include <filesystem>
#include <mutex>

#include <httplib.h>
// <resolv.h> defines `_res` as a macro, which breaks Eigen headers included later
#ifdef _res
#undef _res
#endif

#include "credscore/verify.hpp"

namespace credscore {

/// Source of daily bars. Returns nullopt when the ticker is unknown.
class PriceProvider {
 public:
  virtual ~PriceProvider() = default;
  virtual std::optional<PriceSeries> get_series(const std::string& ticker, const Date& from, const Date& to) const = 0;
};

inline PriceSeries slice_series(const PriceSeries& s, const Date& from, const Date& to) {
  PriceSeries out{s.ticker, {}};
  for (const auto& b : s.bars)
    if (!(b.date < from) && !(to < b.date)) out.bars.push_back(b);
  return out;
}

/// Directory of `<TICKER>.csv` files, each loaded once.
class CsvPriceStore : public PriceProvider {
 public:
  explicit CsvPriceStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw InputError("price directory '" + dir_.string() + "' does not exist");
  }

  std::optional<PriceSeries> get_series(const std::string& ticker, const Date& from, const Date& to) const override {
    const std::string key = unicode::to_upper(ticker);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      auto path = dir_ / (key + ".csv");
      std::optional<PriceSeries> s;
      if (std::filesystem::exists(path)) s = load_price_csv(path.string(), key);
      it = cache_.emplace(key, std::move(s)).first;
    }
    if (!it->second) return std::nullopt;
    return slice_series(*it->second, from, to);
  }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::optional<PriceSeries>> cache_;
};

inline constexpr const char* kPriceBaseUrlEnv = "CREDSCORE_PRICE_BASE_URL";

/// Fetches `GET {base}/prices/{ticker}?from=YYYY-MM-DD&to=YYYY-MM-DD`, which
/// answers with `[{date, open, high, low, close}]` or 404 for unknown tickers.
/// Only plain http is supported.
class HttpPriceProvider : public PriceProvider {
 public:
  explicit HttpPriceProvider(std::string base_url, int timeout_seconds = 10) : timeout_(timeout_seconds) {
    if (const char* env = std::getenv(kPriceBaseUrlEnv); env && *env) base_url = env;
    const std::string scheme = "http://";
    if (base_url.rfind(scheme, 0) != 0) throw InputError("price base URL must start with http:// (got '" + base_url + "')");
    auto slash = base_url.find('/', scheme.size());
    host_ = base_url.substr(0, slash);
    prefix_ = slash == std::string::npos ? "" : base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::optional<PriceSeries> get_series(const std::string& ticker, const Date& from, const Date& to) const override {
    const std::string key = unicode::to_upper(ticker);
    httplib::Client client(host_);
    client.set_connection_timeout(timeout_, 0);
    client.set_read_timeout(timeout_, 0);
    std::string path = prefix_ + "/prices/" + httplib::detail::encode_query_param(key) +
                       "?from=" + format_date(from) + "&to=" + format_date(to);
    auto res = client.Get(path);
    if (!res) throw Error("price request to " + host_ + path + " failed: " + httplib::to_string(res.error()));
    if (res->status == 404) return std::nullopt;
    if (res->status != 200)
      throw Error("price request to " + host_ + path + " returned HTTP " + std::to_string(res->status));
    std::vector<PriceBar> bars;
    try {
      auto j = nlohmann::json::parse(res->body);
      if (!j.is_array()) throw InputError("expected a JSON array");
      for (const auto& e : j)
        bars.push_back({parse_date(e.at("date").get<std::string>()), e.at("open").get<double>(),
                        e.at("high").get<double>(), e.at("low").get<double>(), e.at("close").get<double>()});
      return make_series(key, std::move(bars));
    } catch (const std::exception& e) {
      throw InputError("price response for " + key + ": " + e.what());
    }
  }

  const std::string& host() const { return host_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string host_;
  std::string prefix_;
  int timeout_;
};

/// Verifies one post against every ticker it mentions.
inline std::vector<ForecastOutcome> verify_post(const Post& post, Category category, const std::vector<std::string>& tickers,
                                                const PriceProvider& prices, const VerificationConfig& cfg) {
  cfg.validate();
  const Date publish = cfg.publish_date(post.published_at);
  std::vector<ForecastOutcome> out;
  auto stamp = [&](ForecastOutcome o) {
    o.post_id = post.id;
    o.advisor_id = post.advisor_id;
    o.category = category;
    out.push_back(std::move(o));
  };
  if (tickers.empty()) {
    ForecastOutcome o;
    o.reason = category == Category::Other ? reason::kOtherCategory : reason::kNoTicker;
    stamp(o);
    return out;
  }
  auto window = trading_window(publish, cfg);
  const Date from = add_days(publish, -cfg.baseline_lookback_days);
  // a week past the window tells a covered window from a truncated series
  const Date to = add_days(window.empty() ? publish : window.back(), 7);
  for (const auto& t : tickers) {
    if (category == Category::Other) {
      ForecastOutcome o;
      o.ticker = t;
      o.reason = reason::kOtherCategory;
      stamp(o);
      continue;
    }
    auto series = prices.get_series(t, from, to);
    if (!series) {
      ForecastOutcome o;
      o.ticker = unicode::to_upper(t);
      o.reason = reason::kNoPriceData;
      stamp(o);
      continue;
    }
    stamp(verify_forecast(category, *series, publish, cfg));
  }
  return out;
}

}  // namespace credscore
