#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "credscore/corpus.hpp"
#include "credscore/date.hpp"
#include "credscore/explain.hpp"
#include "credscore/resources.hpp"

namespace credscore::demo {

namespace fs = std::filesystem;

struct DemoOptions {
  std::size_t posts = 300;
  std::size_t advisors = 12;
  std::uint64_t seed = 7;
};

struct DemoTicker {
  std::string symbol;
  std::vector<std::string> aliases;
};

inline const std::vector<DemoTicker>& demo_tickers() {
  static const std::vector<DemoTicker> t{
      {"SAN", {"santander", "banco santander"}}, {"BBVA", {"bbva"}},   {"ITX", {"inditex"}},
      {"TEF", {"telefonica"}},                   {"IBE", {"iberdrola"}}, {"REP", {"repsol"}},
      {"NNOX", {"nanox", "nano x"}},             {"ASML", {"asml"}}};
  return t;
}

/// Mentioned in a few posts but absent from the price store.
inline constexpr const char* kUnpricedTicker = "ZZZZ";

struct Fixture {
  PostCollection posts;
  std::vector<PriceSeries> prices;
  std::vector<SocialMetrics> metrics;
  std::vector<Date> holidays;
};

namespace detail {

inline const std::vector<std::string>& phrases(Category c) {
  static const std::vector<std::string> drop{
      "pierde el soporte",       "señal bajista clara",  "objetivo de caída en {n} euros", "momento de vender",
      "desplome probable",       "divergencia bajista",  "entrada en corto",               "caída esperada -{p}%",
      "gap a la baja",           "techo en {n} euros",   "figura de hombro cabeza hombro", "miedo en el sector",
      "rotura de mínimos",       "presión vendedora",    "debilidad en el gráfico"};
  static const std::vector<std::string> rise{
      "rompe resistencia",      "señal alcista",         "objetivo de subida en {n} euros", "buen momento para comprar",
      "rebote desde soporte",   "divergencia alcista",   "entrada en largo",               "ganancia esperada +{p}%",
      "gap al alza",            "suelo en {n} euros",    "doble suelo confirmado",         "fuerza compradora",
      "nuevos máximos",         "oportunidad de compra", "tendencia alcista intacta"};
  static const std::vector<std::string> other{
      "presenta resultados el jueves", "reparto de dividendo",       "junta de accionistas mañana",
      "resumen de la sesión",         "agenda macro de la semana",  "webinar gratuito esta tarde",
      "nuevo artículo en el blog",    "entrevista en la radio",     "cambio de consejero delegado",
      "ampliación de capital",        "calendario de resultados",   "hilo con preguntas frecuentes"};
  switch (c) {
    case Category::Drop: return drop;
    case Category::Rise: return rise;
    default: return other;
  }
}

inline const std::vector<std::string>& shared_phrases() {
  static const std::vector<std::string> s{"atentos al precio",  "el mercado decide",   "vigilando {n} euros",
                                          "semana interesante", "veremos el cierre",   "volumen creciente",
                                          "gráfico diario",     "sesión movida",       "cotiza en {n} euros",
                                          "mirad el gráfico",   "análisis técnico",    "corto plazo"};
  return s;
}

inline std::string fill(std::string s, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pct(2, 12), whole(3, 95), cents(0, 99);
  char buf[32];
  if (auto pos = s.find("{p}"); pos != std::string::npos) s.replace(pos, 3, std::to_string(pct(rng)));
  if (auto pos = s.find("{n}"); pos != std::string::npos) {
    std::snprintf(buf, sizeof buf, "%d,%02d", whole(rng), cents(rng));
    s.replace(pos, 3, buf);
  }
  return s;
}

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace detail

inline std::vector<Date> demo_holidays() {
  return {parse_date("2024-01-01"), parse_date("2024-03-29"), parse_date("2024-04-01"), parse_date("2024-05-01"),
          parse_date("2024-12-25"), parse_date("2024-12-26")};
}

/// Synthetic advisors, labeled posts, daily prices and account metrics.
/// The last advisor only posts news, so it never gets a forecast.
inline Fixture make_fixture(const DemoOptions& opt = {}) {
  if (opt.advisors < 2 || opt.posts < opt.advisors) throw InputError("demo fixture needs at least two advisors");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Fixture f;
  f.holidays = demo_holidays();
  const auto& tickers = demo_tickers();

  const Date first_post = parse_date("2024-01-02");
  const int post_days = 210;
  for (std::size_t i = 0; i < opt.posts; ++i) {
    LabeledPost lp;
    Post& p = lp.post;
    const std::size_t adv = i % opt.advisors;
    p.id = "p" + std::string(i < 9 ? "00" : i < 99 ? "0" : "") + std::to_string(i + 1);
    p.advisor_id = "adv" + detail::two(static_cast<int>(adv + 1));
    double r = u01(rng);
    Category c = adv + 1 == opt.advisors ? Category::Other
                 : r < 0.25              ? Category::Drop
                 : r < 0.65              ? Category::Rise
                                         : Category::Other;
    lp.label = c;

    Date day = add_days(first_post, std::uniform_int_distribution<int>(0, post_days)(rng));
    int hour = std::uniform_int_distribution<int>(7, 22)(rng);
    int minute = std::uniform_int_distribution<int>(0, 59)(rng);
    const std::string offset = day < parse_date("2024-03-31") ? "+01:00" : "+02:00";
    p.published_at = parse_timestamp(format_date(day) + "T" + detail::two(hour) + ":" + detail::two(minute) + ":00" + offset);

    std::string mention;
    double m = u01(rng);
    const DemoTicker& t = detail::pick(tickers, rng);
    if (m < 0.03)
      mention = std::string("$") + kUnpricedTicker;
    else if (m < 0.60)
      mention = "$" + t.symbol;
    else if (m < 0.75)
      mention = "#" + unicode::to_upper(t.aliases.front());
    else if (m < 0.92)
      mention = detail::pick(t.aliases, rng);

    std::vector<std::string> parts;
    std::size_t own = 1 + std::uniform_int_distribution<std::size_t>(0, 1)(rng);
    for (std::size_t k = 0; k < own; ++k) parts.push_back(detail::fill(detail::pick(detail::phrases(c), rng), rng));
    if (u01(rng) < 0.20) {
      Category noise = kAllCategories[(index_of(c) + 1 + (u01(rng) < 0.5 ? 0 : 1)) % kNumCategories];
      parts.push_back(detail::fill(detail::pick(detail::phrases(noise), rng), rng));
    }
    std::size_t shared = 1 + std::uniform_int_distribution<std::size_t>(0, 1)(rng);
    for (std::size_t k = 0; k < shared; ++k) parts.push_back(detail::fill(detail::pick(detail::shared_phrases(), rng), rng));
    std::shuffle(parts.begin(), parts.end(), rng);

    std::string text = mention;
    for (auto s : parts) {
      s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
      text += (text.empty() ? "" : text.size() == mention.size() ? " " : ". ") + s;
    }
    if (u01(rng) < 0.3) text += " https://t.co/x" + std::to_string(i);
    p.text = text;
    p.cashtags = credscore::detail::scan_cashtags(p.text);
    p.hashtags = credscore::detail::scan_hashtags(p.text);
    f.posts.push_back(std::move(lp));
  }

  std::normal_distribution<double> ret(0.0, 0.015), gap(0.0, 0.004), wick(0.0, 0.006);
  const Date from = parse_date("2023-12-01"), to = parse_date("2024-09-30");
  for (const auto& t : tickers) {
    double close = std::uniform_real_distribution<double>(5.0, 100.0)(rng);
    std::vector<PriceBar> bars;
    for (Date d = from; d <= to; d = add_days(d, 1)) {
      if (is_weekend(d) || std::find(f.holidays.begin(), f.holidays.end(), d) != f.holidays.end()) continue;
      PriceBar b;
      b.date = d;
      b.open = std::round(close * (1.0 + gap(rng)) * 1e4) / 1e4;
      b.close = std::round(b.open * (1.0 + ret(rng)) * 1e4) / 1e4;
      b.high = std::round(std::max(b.open, b.close) * (1.0 + std::abs(wick(rng))) * 1e4) / 1e4;
      b.low = std::round(std::min(b.open, b.close) * (1.0 - std::abs(wick(rng))) * 1e4) / 1e4;
      close = b.close;
      bars.push_back(b);
    }
    f.prices.push_back(make_series(t.symbol, std::move(bars)));
  }

  std::lognormal_distribution<double> followers(9.0, 1.0);
  for (std::size_t a = 0; a < opt.advisors; ++a) {
    SocialMetrics s;
    s.advisor_id = "adv" + detail::two(static_cast<int>(a + 1));
    s.followers = std::round(followers(rng));
    s.retweets_avg = std::round(s.followers * 0.002 * (0.5 + u01(rng)) * 100) / 100;
    s.retweets_max = std::round(s.retweets_avg * (8 + 20 * u01(rng)));
    s.likes_avg = std::round(s.followers * 0.01 * (0.5 + u01(rng)) * 100) / 100;
    s.likes_max = std::round(s.likes_avg * (8 + 20 * u01(rng)));
    s.replies_avg = std::round(s.followers * 0.0008 * (0.5 + u01(rng)) * 100) / 100;
    s.replies_max = std::round(s.replies_avg * (8 + 20 * u01(rng)));
    f.metrics.push_back(s);
  }
  return f;
}

inline nlohmann::ordered_json demo_config() {
  return nlohmann::ordered_json::parse(R"({
  "posts": "posts.jsonl",
  "prices": {"provider": "csv", "dir": "prices"},
  "ticker_dictionaries": ["tickers.csv"],
  "social_metrics": "social_metrics.csv",
  "holidays": "holidays.txt",
  "resources": {
    "stopwords": "resources/stopwords_es.txt",
    "lemma_exceptions": "resources/lemma_exceptions.csv",
    "suffix_rules": "resources/suffix_rules.txt",
    "affect_lexicon": "resources/affect_lexicon.csv",
    "template": "resources/template_en.txt"
  },
  "features": {
    "char": {"ngram_range": [3, 4], "min_df": 0.03, "max_df": 0.4, "max_features": null},
    "word": {"ngram_range": [1, 1], "min_df": 0.01, "max_df": 0.23, "max_features": null},
    "char_wb": {"ngram_range": [3, 5], "min_df": 0.02, "max_df": 0.26, "max_features": null},
    "currency_words": false
  },
  "lexicon": {"fraction": 0.1},
  "model": {"algorithm": "rf", "folds": 10, "benchmark": ["mnb", "cnb", "knn", "dt"]},
  "verification": {"threshold": 0.03, "window_weeks": 3, "baseline_lookback_days": 14},
  "correlation": {"method": "pearson"},
  "explain": {"samples": 500, "top_k": 5},
  "seed": 42,
  "out": "out"
})");
}

inline void write_text(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << content;
}

inline std::string price_csv(const PriceSeries& s) {
  std::string out = "date,open,high,low,close\n";
  char buf[128];
  for (const auto& b : s.bars) {
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%.4f\n", format_date(b.date).c_str(), b.open, b.high, b.low, b.close);
    out += buf;
  }
  return out;
}

/// Writes the fixture, its configuration and copies of the bundled language
/// resources under `dir`.
inline void write_fixture(const Fixture& f, const fs::path& dir) {
  std::ostringstream posts;
  write_posts(posts, f.posts);
  write_text(dir / "posts.jsonl", posts.str());
  for (const auto& s : f.prices) write_text(dir / "prices" / (s.ticker + ".csv"), price_csv(s));

  std::string tickers = "alias,ticker\n";
  for (const auto& t : demo_tickers())
    for (const auto& a : t.aliases) tickers += a + "," + t.symbol + "\n";
  write_text(dir / "tickers.csv", tickers);

  std::string metrics;
  for (const char* c : kSocialMetricColumns) metrics += std::string(metrics.empty() ? "" : ",") + c;
  metrics += "\n";
  char buf[256];
  for (const auto& m : f.metrics) {
    std::snprintf(buf, sizeof buf, "%s,%.0f,%.2f,%.0f,%.2f,%.0f,%.2f,%.0f\n", m.advisor_id.c_str(), m.followers,
                  m.retweets_avg, m.retweets_max, m.likes_avg, m.likes_max, m.replies_avg, m.replies_max);
    metrics += buf;
  }
  write_text(dir / "social_metrics.csv", metrics);

  std::string holidays = "# exchange holidays\n";
  for (const auto& d : f.holidays) holidays += format_date(d) + "\n";
  write_text(dir / "holidays.txt", holidays);

  write_text(dir / "config.json", demo_config().dump(2) + "\n");
  write_text(dir / "resources" / "stopwords_es.txt", std::string(resources::kSpanishStopwords));
  write_text(dir / "resources" / "lemma_exceptions.csv", std::string(resources::kLemmaExceptions));
  write_text(dir / "resources" / "suffix_rules.txt", std::string(resources::kSuffixRules));
  write_text(dir / "resources" / "affect_lexicon.csv", std::string(resources::kAffectLexicon));
  explain::ExplanationTemplate tpl;
  write_text(dir / "resources" / "template_en.txt", tpl.main + "\n" + tpl.features + "\n");
}

}  // namespace credscore::demo
