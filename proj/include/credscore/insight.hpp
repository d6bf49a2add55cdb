#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "credscore/corpus.hpp"
#include "credscore/verify.hpp"

namespace credscore {

struct Correlation {
  double r = 0.0;
  bool undefined = true;  // fewer than 2 pairs or zero variance
  std::size_t n = 0;
};

/// Product-moment correlation, two-pass for accuracy, clamped to [-1, 1].
inline Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InputError("correlation inputs differ in length");
  Correlation c;
  c.n = xs.size();
  if (c.n < 2) return c;
  const double n = static_cast<double>(c.n);
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return c;
  c.undefined = false;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return c;
}

/// Ranks starting at 1, ties sharing their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline Correlation spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InputError("correlation inputs differ in length");
  return pearson(average_ranks(xs), average_ranks(ys));
}

enum class CorrelationMethod { Pearson, Spearman };

inline CorrelationMethod parse_correlation_method(std::string_view s) {
  if (s == "pearson") return CorrelationMethod::Pearson;
  if (s == "spearman") return CorrelationMethod::Spearman;
  throw InputError("unknown correlation method '" + std::string(s) + "'");
}

inline std::string to_string(CorrelationMethod m) { return m == CorrelationMethod::Pearson ? "pearson" : "spearman"; }

/// Social metric rows in report order, with their display labels.
struct MetricRow {
  const char* key;
  const char* group;
  const char* stat;
  double SocialMetrics::*field;
};

inline const std::array<MetricRow, 7>& metric_rows() {
  static const std::array<MetricRow, 7> rows{{
      {"followers", "Followers", "Num.", &SocialMetrics::followers},
      {"retweets_avg", "Retweets", "Avg.", &SocialMetrics::retweets_avg},
      {"retweets_max", "Retweets", "Max.", &SocialMetrics::retweets_max},
      {"likes_avg", "Likes", "Avg.", &SocialMetrics::likes_avg},
      {"likes_max", "Likes", "Max.", &SocialMetrics::likes_max},
      {"replies_avg", "Replies", "Avg.", &SocialMetrics::replies_avg},
      {"replies_max", "Replies", "Max.", &SocialMetrics::replies_max},
  }};
  return rows;
}

inline constexpr std::array<const char*, 3> kQualityColumns{"drop", "rise", "global"};

/// Rows follow metric_rows(), columns drop, rise, global.
struct CorrelationTable {
  CorrelationMethod method = CorrelationMethod::Pearson;
  std::array<std::array<Correlation, 3>, 7> cells{};
};

/// Correlates each social metric with each quality column over the advisors
/// that have both. Advisors with an absent quality are left out of that column.
inline CorrelationTable correlate_metrics(const std::vector<CredibilityRank>& ranks,
                                          const std::vector<SocialMetrics>& metrics,
                                          CorrelationMethod method = CorrelationMethod::Pearson) {
  std::map<std::string, const SocialMetrics*> by_id;
  for (const auto& m : metrics) by_id[m.advisor_id] = &m;
  // sorted by advisor id so the input order cannot matter
  std::vector<const CredibilityRank*> sorted;
  for (const auto& r : ranks) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->advisor_id < b->advisor_id; });

  CorrelationTable t;
  t.method = method;
  for (std::size_t col = 0; col < 3; ++col) {
    for (std::size_t row = 0; row < metric_rows().size(); ++row) {
      std::vector<double> xs, ys;
      for (const auto* r : sorted) {
        auto it = by_id.find(r->advisor_id);
        if (it == by_id.end()) continue;
        const auto& q = col == 0 ? r->drop_quality : col == 1 ? r->rise_quality : r->global_quality;
        if (!q) continue;
        xs.push_back(it->second->*metric_rows()[row].field);
        ys.push_back(*q);
      }
      t.cells[row][col] = method == CorrelationMethod::Pearson ? pearson(xs, ys) : spearman(xs, ys);
    }
  }
  return t;
}

inline std::string format_correlation(const Correlation& c) {
  if (c.undefined) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", c.r);
  return std::string(buf) == "-0.000" ? "0.000" : buf;
}

/// Social metric, statistic, then one column per quality.
inline std::string correlation_table_csv(const CorrelationTable& t) {
  std::string out = "social_metric,statistic,drop,rise,global\n";
  for (std::size_t row = 0; row < metric_rows().size(); ++row) {
    out += std::string(metric_rows()[row].group) + "," + metric_rows()[row].stat;
    for (const auto& c : t.cells[row]) out += "," + format_correlation(c);
    out += "\n";
  }
  return out;
}

inline nlohmann::ordered_json correlation_table_json(const CorrelationTable& t) {
  nlohmann::ordered_json j;
  j["method"] = to_string(t.method);
  j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t row = 0; row < metric_rows().size(); ++row) {
    nlohmann::ordered_json r;
    r["metric"] = metric_rows()[row].key;
    for (std::size_t col = 0; col < 3; ++col) {
      const auto& c = t.cells[row][col];
      r[kQualityColumns[col]] = {{"r", c.undefined ? nlohmann::ordered_json() : nlohmann::ordered_json(c.r)},
                                 {"n", c.n},
                                 {"undefined", c.undefined}};
    }
    j["rows"].push_back(std::move(r));
  }
  return j;
}

}  // namespace credscore
