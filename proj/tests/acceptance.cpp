// Standalone acceptance run: one PASS/FAIL line per criterion with its time
// budget. Exits non-zero when any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "credscore/prices.hpp"
#include "credscore/classify.hpp"
#include "credscore/explain.hpp"
#include "credscore/feature_vector.hpp"
#include "credscore/insight.hpp"
#include "domain_oracles.hpp"
#include "oracles.hpp"

using namespace credscore;
namespace fs = std::filesystem;
using classify::Vector;

namespace {

struct Outcome {
  std::size_t checks = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
  bool ok() const { return failures.empty(); }
};

bool rel_eq(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Readability, reading time and signed quantities

struct TextCase {
  std::string text;
  double words, sentences, syllables, miniwords, chars;
  SignedQuantities quantities;
};

// Counts below were worked out by hand: syllables are vowel groups, words are
// whitespace pieces trimmed of punctuation, mini-words have at most 3 letters,
// chars are code points after trimming outer whitespace.
const std::vector<TextCase>& text_cases() {
  static const std::vector<TextCase> cases{
      {"casa casa casa casa casa sol sol sol sol sol.", 10, 1, 15, 5, 45, {}},
      {"sol", 1, 1, 1, 1, 3, {}},
      {"El mercado cae hoy.", 4, 1, 6, 3, 19, {}},
      {"Sube. Baja! Cierra?", 3, 3, 6, 0, 19, {}},
      {"SAN sube 3% hoy", 4, 1, 5, 3, 15, {0, 0, 1, 0}},
      {"Cae -2% y rebota.", 4, 1, 6, 3, 17, {0, 0, 0, 1}},
      {"Objetivo 14,73€ en ITX.", 4, 1, 7, 2, 23, {1, 0, 0, 0}},
      {"-5$ y 10$ y -1.5%", 5, 1, 5, 5, 17, {1, 1, 0, 1}},
      {"  ñu  ", 1, 1, 1, 1, 2, {}},
      {"Divergencia alcista en el RSI. Compro!", 6, 2, 12, 3, 38, {}},
      {"¡Qué caída!", 2, 1, 3, 1, 11, {}},
      {"#SANTANDER Bullish divergence monitoring 4.54 euros at close", 8, 1, 19, 1, 60, {}},
      {"Baja. Baja. Baja.", 3, 3, 6, 0, 17, {}},
      {"a e i o u", 5, 1, 5, 5, 9, {}},
      {"pfff brrr.", 2, 1, 2, 0, 10, {}},
      {"Stop en 9,80$ y objetivo 12%.", 6, 1, 9, 3, 29, {1, 0, 1, 0}},
      {"Resistencia... soporte!!", 2, 2, 7, 0, 24, {}},
      {"Ya", 1, 1, 1, 1, 2, {}},
      {"Ibex 35 sube un 1,5% y el BBVA cae -0,8%.", 10, 1, 12, 7, 41, {0, 0, 1, 1}},
      {"Vendo. Compro. Espero.", 3, 3, 7, 0, 22, {}},
  };
  return cases;
}

Outcome criterion_formulas() {
  Outcome o;
  for (const auto& c : text_cases()) {
    const double fre = 206.835 - 1.015 * (c.words / c.sentences) - 84.6 * (c.syllables / c.words);
    const double mer = (c.words + c.miniwords) / c.sentences;
    const double ms = 14.69 * c.chars;
    o.expect(rel_eq(flesch_reading_ease(c.text), fre, 1e-9),
             "FRE of '" + c.text + "' = " + num(flesch_reading_ease(c.text)) + ", want " + num(fre));
    o.expect(rel_eq(mcalpine_eflaw(c.text), mer, 1e-9),
             "EFLAW of '" + c.text + "' = " + num(mcalpine_eflaw(c.text)) + ", want " + num(mer));
    o.expect(rel_eq(reading_time_ms(c.text), ms, 1e-9),
             "reading time of '" + c.text + "' = " + num(reading_time_ms(c.text)) + ", want " + num(ms));
    o.expect(count_signed_quantities(c.text) == c.quantities, "signed quantities of '" + c.text + "'");
  }
  o.expect(count_signed_quantities("monitoring 4.54 euros at close", true) == SignedQuantities{1, 0, 0, 0},
           "currency-word extension");
  return o;
}

// ---------------------------------------------------------------------------
// 2. Vectorizer document-frequency contract

Outcome criterion_vectorizer() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const std::vector<std::string> pool{"ab", "abc", "b", "cab", "bca", "a", "cc"};
  std::uniform_int_distribution<std::size_t> len(1, 5), pick(0, pool.size() - 1), docs(2, 8), mode_pick(0, 2),
      hi_pick(1, 3);
  std::uniform_real_distribution<double> min_df(0.0, 0.4), max_df(0.5, 1.0);
  const NgramMode modes[] = {NgramMode::Word, NgramMode::Char, NgramMode::CharWb};
  // corpora whose bounds leave no term are redrawn
  std::size_t fitted = 0, attempts = 0;
  while (fitted < 1000 && ++attempts < 5000) {
    std::vector<std::string> corpus;
    for (std::size_t d = docs(rng); d > 0; --d) {
      std::string doc;
      for (std::size_t n = len(rng); n > 0; --n) doc += pool[pick(rng)] + " ";
      corpus.push_back(doc);
    }
    const NgramMode mode = modes[mode_pick(rng)];
    const std::size_t hi = hi_pick(rng);
    const double lo_df = min_df(rng), hi_df = max_df(rng);
    Vocabulary v;
    try {
      v = fit_vectorizer(corpus, {mode, 1, hi, lo_df, hi_df, std::nullopt});
    } catch (const InputError&) {
      continue;
    }
    ++fitted;
    const std::string m = to_string(mode);
    const double n_docs = static_cast<double>(corpus.size());
    for (std::size_t col = 0; col < v.size(); ++col) {
      const double share = static_cast<double>(v.document_frequencies()[col]) / n_docs;
      o.expect(share >= lo_df && share <= hi_df, "df bound violated for '" + v.terms()[col] + "'");
    }
    std::vector<std::size_t> df(v.size(), 0);
    for (const auto& doc : corpus)
      for (auto [col, n] : vectorize(doc, v)) {
        ++df[col];
        o.expect(n == oracle::occurrences(doc, v.terms()[col], m, 1, hi), "count of '" + v.terms()[col] + "'");
      }
    o.expect(df == v.document_frequencies(), "recounted df differs from fitted df");
    std::set<std::string> all;
    for (const auto& doc : corpus) all.merge(oracle::candidate_terms(doc, m, 1, hi));
    for (const auto& term : all) {
      std::size_t n = 0;
      for (const auto& doc : corpus) n += oracle::occurrences(doc, term, m, 1, hi) > 0;
      const double share = static_cast<double>(n) / n_docs;
      o.expect(v.column(term).has_value() == (share >= lo_df && share <= hi_df), "retention of '" + term + "'");
    }
  }
  o.expect(fitted == 1000, "only " + std::to_string(fitted) + " corpora produced a vocabulary");
  return o;
}

// ---------------------------------------------------------------------------
// 3. Lexicon induction

Outcome criterion_lexicon() {
  Outcome o;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> n_posts(3, 50), n_tok(1, 8), word(0, 40), cat(0, 2), pct(1, 100);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<LabeledTokens> corpus;
    for (int p = n_posts(rng); p > 0; --p) {
      std::vector<std::string> toks;
      for (int k = n_tok(rng); k > 0; --k) toks.push_back("w" + std::to_string(word(rng)));
      // every category needs at least one post
      const std::size_t c = corpus.size() < 3 ? corpus.size() : static_cast<std::size_t>(cat(rng));
      corpus.emplace_back(toks, kAllCategories[c]);
    }
    const auto percent = static_cast<std::size_t>(pct(rng));
    auto lex = induce_lexicons(corpus, static_cast<double>(percent) / 100.0);
    auto expect = oracle::brute_force_lexicons(corpus, percent);
    std::set<std::string> seen;
    for (Category c : kAllCategories) {
      std::vector<std::string> got;
      for (const auto& t : lex.terms(c)) {
        got.push_back(t.term);
        o.expect(seen.insert(t.term).second, "term '" + t.term + "' in two lexicons");
      }
      o.expect(got == expect[c], "trial " + std::to_string(trial) + " " + to_string(c) + " lexicon differs");
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// 4. Classifiers

Outcome criterion_classifiers() {
  using namespace classify;
  Outcome o;
  const Category D = Category::Drop, R = Category::Rise;

  // alpha = 1: P(w|drop) = (3, 2, 1) / 6, P(w|rise) = (1, 2, 3) / 6, equal priors
  Matrix X{{1, 0, 0}, {1, 1, 0}, {0, 0, 1}, {0, 1, 1}};
  auto nb = NaiveBayes::fit(ModelSpec::make(Algorithm::MNB, {{"alpha", 1.0}}), X, {D, D, R, R});
  const double drop = 0.5 * (3.0 / 6) * (2.0 / 6), rise = 0.5 * (1.0 / 6) * (2.0 / 6);
  auto p = nb.predict({1, 1, 0});
  o.expect(p.label == D, "MNB label");
  o.expect(rel_eq(p.scores[0], drop / (drop + rise), 1e-9), "MNB drop posterior " + num(p.scores[0]));
  o.expect(rel_eq(p.scores[1], rise / (drop + rise), 1e-9), "MNB rise posterior " + num(p.scores[1]));
  o.expect(p.scores[2] == 0.0, "MNB absent class");

  // random forest against its own trees
  std::mt19937_64 rng(11);
  std::normal_distribution<double> jitter(0.0, 0.15);
  const double centers[5][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}, {0.5, 0.5}};
  Matrix F;
  std::vector<Category> y;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 30; ++i) {
      F.push_back({centers[c][0] + jitter(rng), centers[c][1] + jitter(rng)});
      y.push_back(kAllCategories[c < 2 ? 0 : c < 4 ? 1 : 2]);
    }
  auto spec = ModelSpec::make(Algorithm::RF, {{"n_estimators", 51}});
  auto forest = RandomForest::fit(spec, F, y, 42);
  std::uniform_real_distribution<double> u(-0.3, 1.3);
  for (int i = 0; i < 100; ++i) {
    Vector probe{u(rng), u(rng)};
    std::array<int, 3> votes{};
    for (const auto& tree : forest.trees()) {
      const auto& v = tree.leaf_value(probe);
      std::size_t best = 0;
      for (std::size_t k = 1; k < 3; ++k)
        if (v[k] > v[best]) best = k;
      ++votes[best];
    }
    std::size_t mode = 0;
    for (std::size_t k = 1; k < 3; ++k)
      if (votes[k] > votes[mode]) mode = k;
    o.expect(index_of(forest.predict(probe).label) == mode, "forest label differs from the tree vote mode");
  }

  // stratified 10-fold
  std::uniform_int_distribution<int> extra(0, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Category> labels;
    for (Category c : kAllCategories)
      for (int i = 10 + extra(rng); i > 0; --i) labels.push_back(c);
    std::shuffle(labels.begin(), labels.end(), rng);
    auto folds = stratified_kfold(labels, 10, static_cast<std::uint64_t>(trial));
    std::array<double, 3> total{};
    for (Category c : labels) ++total[index_of(c)];
    std::vector<int> seen(labels.size(), 0);
    for (const auto& f : folds) {
      std::array<double, 3> counts{};
      for (std::size_t i : f) ++counts[index_of(labels[i])], ++seen[i];
      for (std::size_t c = 0; c < 3; ++c)
        o.expect(std::abs(counts[c] - total[c] / 10.0) < 1.0, "fold class count off by a sample or more");
    }
    o.expect(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }), "folds do not partition");
  }

  // seed-fixed reruns
  for (Algorithm a : kAllAlgorithms) {
    Hyperparameters h;
    if (a == Algorithm::RF) h["n_estimators"] = 40;
    auto s = ModelSpec::make(a, h);
    const std::string first = model_to_json(*train(s, F, y, 7)).dump();
    const std::string second = model_to_json(*train(s, F, y, 7)).dump();
    o.expect(first == second, to_string(a) + " rerun is not byte-identical");
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5. Hybrid coverage

class ConstantModel final : public classify::Classifier {
 public:
  ConstantModel() : spec_(classify::ModelSpec::make(classify::Algorithm::MNB)) {}
  const classify::ModelSpec& spec() const override { return spec_; }
  std::size_t dimension() const override { return 1; }
  classify::Prediction predict(const Vector&) const override {
    ++calls;
    classify::Prediction p;
    p.label = Category::Other;
    p.scores = {0, 0, 1};
    return p;
  }
  nlohmann::json parameters() const override { return {}; }
  mutable std::size_t calls = 0;

 private:
  classify::ModelSpec spec_;
};

Outcome criterion_coverage() {
  Outcome o;
  // filler words rotate through every category so each planted word is the
  // only term unique to its class
  const std::vector<std::string> filler{"ibex", "bolsa", "hoy", "accion", "mercado", "valor"};
  const std::string planted[3] = {"plantdrop", "plantrise", "plantother"};
  std::vector<LabeledTokens> corpus;
  std::size_t n_planted = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    Category c = kAllCategories[i % 3];
    std::vector<std::string> toks{filler[i % filler.size()], filler[(i / 3) % filler.size()]};
    if ((i * 7) % 10 < 6) {
      toks.push_back(planted[index_of(c)]);
      ++n_planted;
    }
    corpus.emplace_back(toks, c);
  }
  o.expect(n_planted * 10 == corpus.size() * 6, "planted share is not 60%");
  auto lex = induce_lexicons(corpus);
  ConstantModel model;
  std::size_t from_lexicon = 0;
  for (const auto& [toks, c] : corpus) {
    auto r = classify::hybrid_classify(toks, lex, model, [] { return Vector{0}; });
    if (r.source == classify::Source::Lexicon) {
      ++from_lexicon;
      o.expect(r.category == c, "lexicon stage mislabeled a planted post");
    }
  }
  o.expect(from_lexicon * 10 == corpus.size() * 6,
           "coverage " + std::to_string(from_lexicon) + "/" + std::to_string(corpus.size()));
  o.expect(model.calls == corpus.size() - from_lexicon, "model consulted for lexicon matches");
  return o;
}

// ---------------------------------------------------------------------------
// 6. Verification

Outcome criterion_verification() {
  Outcome o;
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> start_day(0, 300), span(5, 40), publish_off(-5, 30), hol(0, 50);
  std::uniform_real_distribution<double> step(-0.02, 0.02), wick(0.0, 0.03), keep(0.0, 1.0);
  const double thresholds[] = {0.01, 0.03, 0.05};
  int series = 0;
  while (series < 1000) {
    const Date start = add_days(parse_date("2023-01-02"), start_day(rng));
    std::set<Date> holidays;
    for (int h = 0; h < 3; ++h) holidays.insert(add_days(start, hol(rng)));
    std::vector<PriceBar> bars;
    double p = 100;
    const int n_days = span(rng) * 7 / 5;
    const double skip = keep(rng) * 0.3;
    for (int i = 0; i < n_days; ++i) {
      Date day = add_days(start, i);
      if (is_weekend(day) || holidays.count(day) || keep(rng) < skip) continue;
      double open = p;
      p *= 1 + step(rng);
      bars.push_back({day, open, std::max(open, p) * (1 + wick(rng)), std::min(open, p) * (1 - wick(rng)), p});
    }
    if (bars.empty()) continue;
    ++series;
    PriceSeries s = make_series("X", bars);
    VerificationConfig cfg;
    cfg.threshold = thresholds[series % 3];
    cfg.window_weeks = 1 + series % 3;
    cfg.calendar = std::make_shared<HolidayCalendar>(holidays);
    const Date pub = add_days(start, publish_off(rng));
    for (Category c : {Category::Drop, Category::Rise}) {
      auto got = verify_forecast(c, s, pub, cfg);
      auto want = oracle::oracle_verify(c, s, pub, cfg.threshold, cfg.window_weeks, holidays, cfg.baseline_lookback_days);
      o.expect(got == want, "series " + std::to_string(series) + " " + to_string(c) + " differs from the day scan");
      VerificationConfig lower = cfg;
      lower.threshold = cfg.threshold / 2;
      if (got.status == OutcomeStatus::Success)
        o.expect(verify_forecast(c, s, pub, lower).status == OutcomeStatus::Success, "lower threshold lost a success");
    }
    if (const PriceBar* base = s.last_on_or_before(pub)) {
      PriceSeries m = oracle::mirror(s, base->close);
      for (auto [a, b] : {std::pair{Category::Drop, Category::Rise}, std::pair{Category::Rise, Category::Drop}}) {
        auto x = verify_forecast(a, s, pub, cfg), y = verify_forecast(b, m, pub, cfg);
        o.expect(x.status == y.status && x.trigger_date == y.trigger_date, "mirror symmetry broken");
      }
    }
  }

  VerificationConfig cfg;
  const Date pub = parse_date("2024-03-01");
  auto window = trading_window(pub, cfg);
  std::vector<PriceBar> flat{{pub, 100, 100, 100, 100}};
  for (const auto& day : window) flat.push_back({day, 100, 100, 100, 100});
  auto dip = flat;
  dip[4] = {window[3], 99, 99.5, 96, 98};
  auto d = verify_forecast(Category::Drop, make_series("SAN", dip), pub, cfg);
  o.expect(d.status == OutcomeStatus::Success && d.trigger_date == window[3], "low of 96 should confirm a drop");
  auto peak = flat;
  peak[6] = {window[5], 101, 102.9, 100.5, 102};
  auto r = verify_forecast(Category::Rise, make_series("SAN", peak), pub, cfg);
  o.expect(r.status == OutcomeStatus::Failure, "high of 102.9 should not confirm a rise");
  return o;
}

// ---------------------------------------------------------------------------
// 7. Ranking arithmetic

ForecastOutcome outcome(Category c, OutcomeStatus s) {
  ForecastOutcome f;
  f.advisor_id = "a";
  f.category = c;
  f.status = s;
  return f;
}

Outcome criterion_ranking() {
  using S = OutcomeStatus;
  Outcome o;
  auto r = assess_advisor("a", {outcome(Category::Drop, S::Success), outcome(Category::Drop, S::Success),
                                outcome(Category::Drop, S::Success), outcome(Category::Drop, S::Failure),
                                outcome(Category::Rise, S::Indeterminate)});
  o.expect(r.drop_quality == 0.75, "3 of 4 drop successes");
  o.expect(!r.rise_quality, "rise quality without outcomes");
  o.expect(r.global_quality == 0.75, "global quality 3/4");
  auto mixed = assess_advisor("a", {outcome(Category::Drop, S::Success), outcome(Category::Rise, S::Failure),
                                    outcome(Category::Rise, S::Success), outcome(Category::Rise, S::Failure)});
  o.expect(mixed.drop_quality == 1.0 && mixed.rise_quality && std::abs(*mixed.rise_quality - 1.0 / 3) < 1e-15,
           "per-category ratios 1/1 and 1/3");
  o.expect(mixed.global_quality == 0.5, "global ratio 2/4");

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> n(0, 12), st(0, 2);
  std::size_t bounded = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ForecastOutcome> os;
    std::array<std::array<int, 2>, 2> tally{};
    for (std::size_t c = 0; c < 2; ++c)
      for (int i = n(rng); i > 0; --i) {
        auto s = static_cast<S>(st(rng));
        os.push_back(outcome(kAllCategories[c], s));
        if (s != S::Indeterminate) ++tally[c][s == S::Success ? 0 : 1];
      }
    auto q = assess_advisor("x", os);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& got = c == 0 ? q.drop_quality : q.rise_quality;
      const int verified = tally[c][0] + tally[c][1];
      o.expect(got.has_value() == (verified > 0), "category quality presence");
      if (got) o.expect(*got == static_cast<double>(tally[c][0]) / verified, "category ratio");
    }
    if (!q.global_quality) continue;
    ++bounded;
    double lo = 1, hi = 0;
    for (const auto& c : {q.drop_quality, q.rise_quality})
      if (c) lo = std::min(lo, *c), hi = std::max(hi, *c);
    o.expect(*q.global_quality >= lo - 1e-12 && *q.global_quality <= hi + 1e-12, "global outside category bounds");
  }
  o.expect(bounded > 400, "too few random sets had a global quality");
  return o;
}

// ---------------------------------------------------------------------------
// 8. Correlation

Outcome criterion_correlation() {
  Outcome o;
  std::vector<double> xs{1, 2, 3, 4, 5.5};
  std::vector<double> up, down;
  for (double x : xs) up.push_back(2 * x + 1), down.push_back(-3 * x + 7);
  o.expect(std::abs(pearson(xs, up).r - 1.0) <= 1e-12, "linear r = " + num(pearson(xs, up).r));
  o.expect(std::abs(pearson(xs, down).r + 1.0) <= 1e-12, "anti-linear r = " + num(pearson(xs, down).r));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-100, 100), scale(0.1, 10);
  std::uniform_int_distribution<int> len(3, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> x(n), y(n), xt(n), yt(n);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const double a = scale(rng), b = u(rng), c = (trial % 2 ? 1 : -1) * scale(rng), d = u(rng);
    for (std::size_t i = 0; i < n; ++i) xt[i] = a * x[i] + b, yt[i] = c * y[i] + d;
    const double base = pearson(x, y).r, moved = pearson(xt, yt).r;
    o.expect(base >= -1.0 && base <= 1.0, "r outside [-1, 1]");
    o.expect(std::abs(moved - (c > 0 ? base : -base)) <= 1e-9, "affine transform changed r");
  }

  std::vector<CredibilityRank> ranks;
  std::vector<SocialMetrics> metrics;
  for (int i = 0; i < 6; ++i) {
    CredibilityRank r;
    r.advisor_id = "a" + std::to_string(i);
    r.drop_quality = 0.1 * i;
    r.rise_quality = 0.9 - 0.1 * i;
    r.global_quality = 0.5 + 0.05 * i;
    ranks.push_back(r);
    const double f = 10.0 * (i + 1);
    metrics.push_back({r.advisor_id, f, f + 1, f * 2, f * 3, f * 4, f * 5, f * 6});
  }
  auto table = correlate_metrics(ranks, metrics);
  const std::string csv = correlation_table_csv(table);
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  o.expect(lines.size() == 8, "correlation report should have a header and 7 rows");
  if (lines.size() == 8) {
    o.expect(lines[0] == "social_metric,statistic,drop,rise,global", "header: " + lines[0]);
    const char* expected[7] = {"Followers,Num.,", "Retweets,Avg.,", "Retweets,Max.,", "Likes,Avg.,",
                               "Likes,Max.,",     "Replies,Avg.,",  "Replies,Max.,"};
    for (std::size_t i = 0; i < 7; ++i)
      o.expect(lines[i + 1].rfind(expected[i], 0) == 0, "row " + std::to_string(i + 1) + ": " + lines[i + 1]);
  }
  for (std::size_t row = 0; row < 7; ++row) {
    o.expect(std::abs(table.cells[row][0].r - 1.0) <= 1e-12, "drop quality rises with every metric");
    o.expect(std::abs(table.cells[row][1].r + 1.0) <= 1e-12, "rise quality falls with every metric");
    o.expect(std::abs(table.cells[row][2].r - 1.0) <= 1e-12, "global quality rises with every metric");
  }
  return o;
}

// ---------------------------------------------------------------------------
// 9. Explanations

Outcome criterion_explainer() {
  using namespace explain;
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> m_dist(2, 15);
  std::uniform_real_distribution<double> mag(0.05, 1.0), intercept(-1, 1);
  std::bernoulli_distribution sign(0.5);
  int matched = 0;
  for (int model = 0; model < 100; ++model) {
    const auto m = static_cast<std::size_t>(m_dist(rng));
    Vector beta(m);
    for (auto& b : beta) b = (sign(rng) ? 1 : -1) * mag(rng);
    const double c = intercept(rng);
    auto p = perturb(Vector(m, 1.0), 500, static_cast<std::uint64_t>(model));
    Vector targets;
    for (const auto& mask : p.masks) {
      double t = c;
      for (std::size_t a = 0; a < m; ++a) t += beta[a] * mask[a];
      targets.push_back(t);
    }
    Vector est = fit_surrogate(p.masks, targets);
    std::vector<Attribution> truth, fitted;
    for (std::size_t a = 0; a < m; ++a) {
      truth.push_back({a, "", beta[a]});
      fitted.push_back({a, "", est[a]});
    }
    const std::size_t k = std::min<std::size_t>(5, m);
    auto t = top_features(truth, k), f = top_features(fitted, k);
    bool same = t.items.size() == k && f.items.size() == k;
    for (std::size_t i = 0; same && i < k; ++i) same = t.items[i].index == f.items[i].index;
    matched += same;
  }
  o.expect(matched >= 95, "planted rankings recovered in " + std::to_string(matched) + " of 100");

  std::uniform_int_distribution<int> freq(1, 5);
  WordFrequencies vocab;
  for (const char* w : {"alcista", "bajista", "subir", "bajar", "caida", "soporte", "resistencia", "divergencia",
                        "rebote", "objetivo", "cierre", "ista", "sube", "baja"})
    vocab[w] = static_cast<std::size_t>(freq(rng));
  std::set<std::string> probes{"qq", "xyz", " al", "ista "};
  for (const auto& [w, n] : vocab)
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t len = 1; i + len <= w.size(); ++len) probes.insert(w.substr(i, len));
  for (const auto& g : probes) {
    std::string want = g;
    std::size_t best = 0;
    for (const auto& [w, n] : vocab)
      if (w.find(g) != std::string::npos && (n > best || (n == best && w < want))) want = w, best = n;
    o.expect(chargram_to_word(g, vocab) == want, "chargram '" + g + "' -> " + chargram_to_word(g, vocab));
  }

  const std::string expected =
      "The classification of the post \"#SANTANDER Bullish divergence monitoring 4.54 euros at close\" as short-term "
      "rise can be explained by the presence of these terms: ['bullish', 'divergence']. Additionally, the process "
      "considered the following features: ['Pos. num.'].";
  o.expect(render("#SANTANDER Bullish divergence monitoring 4.54 euros at close", Category::Rise,
                  {"bullish", "divergence"}, {"Pos. num."}) == expected,
           "rendered explanation differs");
  return o;
}

// ---------------------------------------------------------------------------
// 10. End-to-end determinism on the demo fixture

int run(const std::string& args) {
  const std::string cmd = std::string(CREDSCORE_CLI) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::map<std::string, std::string> bundle_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel.rfind("run/", 0) == 0) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[rel] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

Outcome criterion_end_to_end(double assess_limit_s) {
  Outcome o;
  const fs::path config = fs::path(CREDSCORE_SOURCE_DIR) / "data" / "demo" / "config.json";
  const fs::path root = fs::temp_directory_path() / ("credscore_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const fs::path model = root / "model", a = root / "a", b = root / "b";
  const std::string base = "--config " + config.string() + " --seed 42 --model " + model.string();
  o.expect(run("train " + base + " --out " + (root / "train").string()) == 0, "train failed");
  for (const auto& dir : {a, b}) {
    const auto t0 = std::chrono::steady_clock::now();
    o.expect(run("assess " + base + " --out " + dir.string()) == 0, "assess failed into " + dir.string());
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.expect(s < assess_limit_s, "assess took " + num(s) + " s");
    std::ifstream in(dir / "run" / "timings.json");
    if (!in) {
      o.expect(false, "missing run/timings.json");
      continue;
    }
    const auto t = nlohmann::json::parse(in);
    const double worst = t.at("predict_ms_max").get<double>();
    o.expect(worst < 50.0, "slowest per-post prediction " + num(worst) + " ms");
  }
  const auto fa = bundle_files(a), fb = bundle_files(b);
  o.expect(!fa.empty(), "assess wrote no files");
  o.expect(fa.size() == fb.size(), "bundles list different files");
  for (const auto& [name, content] : fa) {
    auto it = fb.find(name);
    o.expect(it != fb.end() && it->second == content, name + " differs between runs");
  }
  fs::remove_all(root);
  return o;
}

struct Criterion {
  std::string name;
  double limit_s;
  std::function<Outcome()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"formula fidelity", 1, criterion_formulas},
      {"vectorizer df contract", 10, criterion_vectorizer},
      {"lexicon induction oracle", 10, criterion_lexicon},
      {"classifier correctness", 60, criterion_classifiers},
      {"hybrid coverage", 5, criterion_coverage},
      {"verification oracle", 10, criterion_verification},
      {"ranking arithmetic", 5, criterion_ranking},
      {"correlation", 5, criterion_correlation},
      {"explainer faithfulness", 30, criterion_explainer},
      // the limit applies to each assess run; the criterion also trains once
      {"end-to-end determinism", 90, [] { return criterion_end_to_end(30); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= c.limit_s) o.expect(false, "over the time limit");
    const bool ok = o.ok();
    failed += !ok;
    std::printf("%s  %2zu %-26s %4zu checks  %8.3f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", i + 1, c.name.c_str(),
                o.checks, s, c.limit_s);
    for (const auto& f : o.failures) std::printf("        %s\n", f.c_str());
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
