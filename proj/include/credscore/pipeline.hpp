#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "credscore/classify.hpp"
#include "credscore/corpus.hpp"
#include "credscore/explain.hpp"
#include "credscore/feature_vector.hpp"
#include "credscore/insight.hpp"
#include "credscore/lexicon.hpp"
#include "credscore/preprocess.hpp"
#include "credscore/prices.hpp"
#include "credscore/verify.hpp"

namespace credscore::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a half-written report.
inline void write_file_atomic(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Configuration

struct PriceSourceConfig {
  std::string provider = "csv";
  fs::path dir;
  std::string base_url;
  int timeout_seconds = 10;
};

struct ResourcePaths {
  std::optional<fs::path> stopwords;
  std::optional<fs::path> lemma_exceptions;
  std::optional<fs::path> suffix_rules;
  std::optional<fs::path> affect_lexicon;
  std::optional<fs::path> template_file;
};

struct ModelConfig {
  classify::Algorithm algorithm = classify::Algorithm::RF;
  classify::Hyperparameters hyperparameters;
  std::optional<fs::path> grid;
  std::size_t folds = 10;
  /// Extra algorithms cross-validated next to the main one for the report.
  std::vector<classify::Algorithm> benchmark;
};

struct PipelineConfig {
  fs::path path;
  fs::path base_dir;
  std::string text;

  fs::path posts;
  PriceSourceConfig prices;
  std::vector<fs::path> ticker_dictionaries;
  std::optional<fs::path> social_metrics;
  std::optional<fs::path> holidays;
  ResourcePaths resources;
  FeatureSpaceConfig features;
  double lexicon_fraction = 0.10;
  ModelConfig model;
  VerificationConfig verification;
  CorrelationMethod correlation = CorrelationMethod::Pearson;
  explain::ExplainOptions explain;
  std::uint64_t seed = 42;
  fs::path out;
  std::optional<fs::path> model_dir;

  /// Every input file the configuration points at, in a fixed order.
  std::vector<fs::path> input_files() const {
    std::vector<fs::path> files{path, posts};
    for (const auto& d : ticker_dictionaries) files.push_back(d);
    for (const auto* p : {&social_metrics, &holidays, &resources.stopwords, &resources.lemma_exceptions,
                          &resources.suffix_rules, &resources.affect_lexicon, &resources.template_file})
      if (*p) files.push_back(**p);
    return files;
  }
};

namespace detail {

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError("config: " + where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw InputError("config: unknown key '" + it.key() + "' in " + where);
  }
}

inline const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline fs::path resolve(const fs::path& base, const json& v, const std::string& key) {
  if (!v.is_string() || v.get<std::string>().empty()) throw InputError("config: " + key + " must be a path string");
  fs::path p(v.get<std::string>());
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

inline fs::path existing(const fs::path& p, const std::string& key) {
  if (!fs::exists(p)) throw InputError("config: " + key + " '" + p.string() + "' does not exist");
  return p;
}

inline std::optional<fs::path> optional_file(const json& obj, const char* key, const fs::path& base,
                                             const std::string& where) {
  if (const json* v = find(obj, key)) return existing(resolve(base, *v, where + key), where + key);
  return std::nullopt;
}

inline VectorizerConfig vectorizer_config(const json& j, VectorizerConfig c, const std::string& where) {
  check_keys(j, {"ngram_range", "min_df", "max_df", "max_features"}, where);
  if (const json* r = find(j, "ngram_range")) {
    if (!r->is_array() || r->size() != 2) throw InputError("config: " + where + ".ngram_range must be [lo, hi]");
    c.ngram_lo = r->at(0).get<std::size_t>();
    c.ngram_hi = r->at(1).get<std::size_t>();
  }
  if (const json* v = find(j, "min_df")) c.min_df = v->get<double>();
  if (const json* v = find(j, "max_df")) c.max_df = v->get<double>();
  if (j.contains("max_features"))
    c.max_features = j["max_features"].is_null() ? std::nullopt : std::optional(j["max_features"].get<std::size_t>());
  try {
    c.validate();
  } catch (const InputError& e) {
    throw InputError("config: " + where + ": " + e.what());
  }
  return c;
}

}  // namespace detail

/// Parses a pipeline configuration. Relative paths resolve against the
/// configuration file's directory, and every referenced file must exist.
inline PipelineConfig parse_config(const std::string& text, const fs::path& path) {
  using detail::find;
  PipelineConfig c;
  c.path = path;
  c.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  c.text = text;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("config: malformed JSON (" + std::string(e.what()) + ")");
  }
  try {
    detail::check_keys(j,
                       {"posts", "prices", "ticker_dictionaries", "social_metrics", "holidays", "resources", "features",
                        "lexicon", "model", "verification", "correlation", "explain", "seed", "out", "model_dir"},
                       "config");
    const fs::path& base = c.base_dir;
    const json* posts = find(j, "posts");
    if (!posts) throw InputError("config: posts is required");
    c.posts = detail::existing(detail::resolve(base, *posts, "posts"), "posts");

    if (const json* p = find(j, "prices")) {
      detail::check_keys(*p, {"provider", "dir", "base_url", "timeout_seconds"}, "prices");
      if (const json* v = find(*p, "provider")) c.prices.provider = v->get<std::string>();
      if (c.prices.provider != "csv" && c.prices.provider != "http")
        throw InputError("config: prices.provider must be csv or http");
      if (const json* v = find(*p, "dir")) c.prices.dir = detail::existing(detail::resolve(base, *v, "prices.dir"), "prices.dir");
      if (const json* v = find(*p, "base_url")) c.prices.base_url = v->get<std::string>();
      if (const json* v = find(*p, "timeout_seconds")) c.prices.timeout_seconds = v->get<int>();
      if (c.prices.provider == "csv" && c.prices.dir.empty()) throw InputError("config: prices.dir is required for csv");
    }
    if (const json* v = find(j, "ticker_dictionaries")) {
      if (!v->is_array()) throw InputError("config: ticker_dictionaries must be a list");
      for (const auto& d : *v) c.ticker_dictionaries.push_back(detail::existing(detail::resolve(base, d, "ticker_dictionaries"), "ticker_dictionaries"));
    }
    c.social_metrics = detail::optional_file(j, "social_metrics", base, "");
    c.holidays = detail::optional_file(j, "holidays", base, "");

    if (const json* r = find(j, "resources")) {
      detail::check_keys(*r, {"stopwords", "lemma_exceptions", "suffix_rules", "affect_lexicon", "template"}, "resources");
      c.resources.stopwords = detail::optional_file(*r, "stopwords", base, "resources.");
      c.resources.lemma_exceptions = detail::optional_file(*r, "lemma_exceptions", base, "resources.");
      c.resources.suffix_rules = detail::optional_file(*r, "suffix_rules", base, "resources.");
      c.resources.affect_lexicon = detail::optional_file(*r, "affect_lexicon", base, "resources.");
      c.resources.template_file = detail::optional_file(*r, "template", base, "resources.");
      if (c.resources.lemma_exceptions.has_value() != c.resources.suffix_rules.has_value())
        throw InputError("config: resources.lemma_exceptions and resources.suffix_rules go together");
    }

    if (const json* f = find(j, "features")) {
      detail::check_keys(*f, {"char", "word", "char_wb", "currency_words", "flesch"}, "features");
      if (const json* v = find(*f, "char")) c.features.char_grams = detail::vectorizer_config(*v, c.features.char_grams, "features.char");
      if (const json* v = find(*f, "word")) c.features.word_grams = detail::vectorizer_config(*v, c.features.word_grams, "features.word");
      if (const json* v = find(*f, "char_wb"))
        c.features.char_wb_grams = detail::vectorizer_config(*v, c.features.char_wb_grams, "features.char_wb");
      if (const json* v = find(*f, "currency_words")) c.features.options.currency_words = v->get<bool>();
      if (const json* v = find(*f, "flesch")) {
        if (!v->is_array() || v->size() != 3) throw InputError("config: features.flesch must hold three coefficients");
        c.features.options.flesch = {v->at(0).get<double>(), v->at(1).get<double>(), v->at(2).get<double>()};
      }
    }

    if (const json* l = find(j, "lexicon")) {
      detail::check_keys(*l, {"fraction"}, "lexicon");
      if (const json* v = find(*l, "fraction")) c.lexicon_fraction = v->get<double>();
      if (!(c.lexicon_fraction > 0.0 && c.lexicon_fraction <= 1.0))
        throw InputError("config: lexicon.fraction must lie in (0, 1]");
    }

    if (const json* m = find(j, "model")) {
      detail::check_keys(*m, {"algorithm", "hyperparameters", "grid", "folds", "benchmark"}, "model");
      if (const json* v = find(*m, "algorithm")) c.model.algorithm = classify::parse_algorithm(v->get<std::string>());
      if (const json* v = find(*m, "hyperparameters")) {
        if (!v->is_object()) throw InputError("config: model.hyperparameters must be an object");
        for (auto it = v->begin(); it != v->end(); ++it) c.model.hyperparameters[it.key()] = it.value();
      }
      if (const json* v = find(*m, "grid")) c.model.grid = detail::existing(detail::resolve(base, *v, "model.grid"), "model.grid");
      if (const json* v = find(*m, "folds")) c.model.folds = v->get<std::size_t>();
      if (const json* v = find(*m, "benchmark")) {
        if (!v->is_array()) throw InputError("config: model.benchmark must be a list");
        for (const auto& a : *v) c.model.benchmark.push_back(classify::parse_algorithm(a.get<std::string>()));
      }
      classify::ModelSpec::make(c.model.algorithm, c.model.hyperparameters);
    }
    if (c.model.folds < 2) throw InputError("config: model.folds must be at least 2");

    if (const json* v = find(j, "verification")) {
      detail::check_keys(*v, {"threshold", "window_weeks", "baseline_lookback_days", "exchange_utc_offset_minutes"},
                         "verification");
      if (const json* x = find(*v, "threshold")) c.verification.threshold = x->get<double>();
      if (const json* x = find(*v, "window_weeks")) c.verification.window_weeks = x->get<int>();
      if (const json* x = find(*v, "baseline_lookback_days")) c.verification.baseline_lookback_days = x->get<int>();
      if (const json* x = find(*v, "exchange_utc_offset_minutes")) c.verification.exchange_offset_minutes = x->get<int>();
    }
    if (c.holidays)
      c.verification.calendar = std::make_shared<HolidayCalendar>(load_holiday_calendar(c.holidays->string()));
    c.verification.validate();

    if (const json* v = find(j, "correlation")) {
      detail::check_keys(*v, {"method"}, "correlation");
      if (const json* x = find(*v, "method")) c.correlation = parse_correlation_method(x->get<std::string>());
    }

    if (const json* e = find(j, "explain")) {
      detail::check_keys(*e, {"samples", "top_k", "kernel_width", "ridge"}, "explain");
      if (const json* x = find(*e, "samples")) c.explain.samples = x->get<std::size_t>();
      if (const json* x = find(*e, "top_k")) c.explain.top_k = x->get<std::size_t>();
      if (const json* x = find(*e, "kernel_width")) c.explain.surrogate.kernel_width = x->get<double>();
      if (const json* x = find(*e, "ridge")) c.explain.surrogate.ridge = x->get<double>();
      if (c.explain.samples < explain::kMinSamples)
        throw InputError("config: explain.samples must be at least " + std::to_string(explain::kMinSamples));
      if (c.explain.top_k == 0) throw InputError("config: explain.top_k must be positive");
    }

    if (const json* v = find(j, "seed")) c.seed = v->get<std::uint64_t>();
    c.out = find(j, "out") ? detail::resolve(base, j["out"], "out") : (base / "out").lexically_normal();
    if (const json* v = find(j, "model_dir")) c.model_dir = detail::resolve(base, *v, "model_dir");
  } catch (const json::exception& e) {
    throw InputError("config: " + std::string(e.what()));
  }
  return c;
}

inline PipelineConfig load_config(const fs::path& path) { return parse_config(read_file(path), path); }

// ---------------------------------------------------------------------------
// Resources and preprocessing

struct Resources {
  std::shared_ptr<const Preprocessor> preprocessor;
  AffectLexicon affect;
  explain::ExplanationTemplate tpl;
};

inline Resources load_resources(const PipelineConfig& c) {
  std::shared_ptr<const TickerDictionary> dict;
  if (!c.ticker_dictionaries.empty()) {
    std::vector<std::string> paths;
    for (const auto& p : c.ticker_dictionaries) paths.push_back(p.string());
    dict = std::make_shared<const TickerDictionary>(load_ticker_dictionary(paths));
  }
  Stopwords sw = c.resources.stopwords ? load_stopwords(c.resources.stopwords->string()) : spanish_stopwords();
  auto lem = c.resources.lemma_exceptions
                 ? load_lemmatizer(c.resources.lemma_exceptions->string(), c.resources.suffix_rules->string())
                 : default_lemmatizer();
  Resources r;
  r.preprocessor = std::make_shared<const Preprocessor>(dict, std::move(sw), lem);
  r.affect = c.resources.affect_lexicon ? load_affect_lexicon(c.resources.affect_lexicon->string())
                                        : default_affect_lexicon();
  if (c.resources.template_file) r.tpl = explain::ExplanationTemplate::load(c.resources.template_file->string());
  return r;
}

struct PreparedCorpus {
  PostCollection posts;
  std::vector<CleanPost> clean;
};

inline PreparedCorpus prepare(const PostCollection& posts, const Resources& r) {
  PreparedCorpus pc;
  pc.posts = posts;
  pc.clean.reserve(posts.size());
  for (const auto& lp : posts) pc.clean.push_back(r.preprocessor->run(lp.post));
  return pc;
}

/// Labels of all posts; training needs every post labeled.
inline std::vector<Category> require_labels(const PostCollection& posts) {
  std::vector<Category> y;
  y.reserve(posts.size());
  for (const auto& lp : posts) {
    if (!lp.label) throw InputError("post '" + lp.post.id + "' has no label");
    y.push_back(*lp.label);
  }
  return y;
}

inline classify::Vector featurize(const Post& post, const CleanPost& clean, const FeatureSpace& space,
                                  const Resources& r) {
  return space.dense(build_feature_vector(post.text, clean, space, r.affect));
}

// ---------------------------------------------------------------------------
// Model bundle

struct ModelBundle {
  FeatureSpace space;
  CategoryLexicons lexicons;
  std::shared_ptr<const classify::Classifier> model;
  explain::WordFrequencies word_frequencies;

  static constexpr std::array<const char*, 4> kFiles{"feature_space.json", "lexicons.json", "model.json",
                                                     "word_frequencies.json"};

  void save(const fs::path& dir) const {
    ordered_json wf = ordered_json::object();
    for (const auto& [w, n] : word_frequencies) wf[w] = n;
    write_file_atomic(dir / kFiles[0], space.to_json().dump() + "\n");
    write_file_atomic(dir / kFiles[1], lexicons.to_json().dump(2) + "\n");
    write_file_atomic(dir / kFiles[2], classify::model_to_json(*model).dump() + "\n");
    write_file_atomic(dir / kFiles[3], wf.dump() + "\n");
  }

  static ModelBundle load(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("model directory '" + dir.string() + "' not found; run train first");
    auto parse = [&](const char* name) {
      try {
        return json::parse(read_file(dir / name));
      } catch (const json::exception& e) {
        throw InputError((dir / name).string() + ": " + e.what());
      }
    };
    ModelBundle b;
    try {
      b.space = FeatureSpace::from_json(parse(kFiles[0]));
      b.lexicons = CategoryLexicons::from_json(parse(kFiles[1]));
      b.model = classify::model_from_json(parse(kFiles[2]));
      const json wf = parse(kFiles[3]);
      for (auto it = wf.begin(); it != wf.end(); ++it) b.word_frequencies[it.key()] = it.value().get<std::size_t>();
    } catch (const json::exception& e) {
      throw InputError("model bundle '" + dir.string() + "': " + e.what());
    }
    if (b.model->dimension() != b.space.dimension())
      throw InputError("model bundle '" + dir.string() + "': model and feature space dimensions differ");
    return b;
  }
};

// ---------------------------------------------------------------------------
// Training

struct CvResult {
  classify::ModelSpec spec;
  classify::EvalReport report;
  std::vector<Category> predictions;
  std::size_t lexicon_hits = 0;
  /// Mean seconds per fold spent fitting the model and predicting the
  /// posts the lexicons left unmatched.
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;

  double coverage_pct() const {
    return predictions.empty() ? 0.0 : 100.0 * static_cast<double>(lexicon_hits) / static_cast<double>(predictions.size());
  }
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Stratified k-fold evaluation of the hybrid classifier. Lexicons and
/// vocabularies are refit on each training fold, so test posts never leak
/// into them. All specs share the same folds and fold features.
inline std::vector<CvResult> hybrid_cross_validate(const PreparedCorpus& pc, const std::vector<Category>& y,
                                                   const std::vector<classify::ModelSpec>& specs, const PipelineConfig& cfg,
                                                   const Resources& r, std::size_t k, std::uint64_t seed) {
  auto folds = classify::stratified_kfold(y, k, seed);
  std::vector<CvResult> results(specs.size());
  for (auto& res : results) res.predictions.assign(y.size(), Category::Other);
  for (std::size_t s = 0; s < specs.size(); ++s) results[s].spec = specs[s];

  for (const auto& test : folds) {
    auto train_idx = classify::complement(test, y.size());
    std::vector<LabeledTokens> labeled;
    std::vector<CleanPost> train_clean;
    for (std::size_t i : train_idx) {
      labeled.emplace_back(pc.clean[i].tokens, y[i]);
      train_clean.push_back(pc.clean[i]);
    }
    CategoryLexicons lex = induce_lexicons(labeled, cfg.lexicon_fraction);
    FeatureSpace space = fit_feature_space(train_clean, cfg.features);
    classify::Matrix X;
    std::vector<Category> y_train;
    for (std::size_t i : train_idx) {
      X.push_back(featurize(pc.posts[i].post, pc.clean[i], space, r));
      y_train.push_back(y[i]);
    }
    std::vector<std::size_t> unmatched;
    classify::Matrix X_test;
    std::size_t hits = 0;
    for (std::size_t i : test) {
      if (auto m = match_lexicon(pc.clean[i].tokens, lex)) {
        for (auto& res : results) res.predictions[i] = m->category;
        ++hits;
      } else {
        unmatched.push_back(i);
        X_test.push_back(featurize(pc.posts[i].post, pc.clean[i], space, r));
      }
    }
    for (auto& res : results) {
      res.lexicon_hits += hits;
      auto t0 = std::chrono::steady_clock::now();
      auto model = classify::train(res.spec, X, y_train, seed);
      res.fit_seconds += seconds_since(t0);
      t0 = std::chrono::steady_clock::now();
      for (std::size_t u = 0; u < unmatched.size(); ++u) res.predictions[unmatched[u]] = model->predict(X_test[u]).label;
      res.predict_seconds += seconds_since(t0);
    }
  }
  for (auto& res : results) {
    res.report = classify::evaluate(res.predictions, y);
    res.fit_seconds /= static_cast<double>(folds.size());
    res.predict_seconds /= static_cast<double>(folds.size());
    res.report.fit_seconds = res.fit_seconds;
    res.report.predict_seconds = res.predict_seconds;
  }
  return results;
}

struct TrainResult {
  ModelBundle bundle;
  classify::ModelSpec spec;
  std::vector<CvResult> cv;  // cv[0] is the selected model
  std::optional<classify::GridResult> grid;
  std::size_t folds = 0;
  std::vector<Category> labels;
};

/// Selects hyperparameters (grid search when a grid is configured),
/// cross-validates the hybrid classifier and fits the final bundle on all
/// labeled posts.
inline TrainResult train_pipeline(const PipelineConfig& cfg, const Resources& r, const PreparedCorpus& pc,
                                  std::uint64_t seed) {
  TrainResult tr;
  tr.labels = require_labels(pc.posts);
  tr.folds = cfg.model.folds;
  const auto& y = tr.labels;

  std::vector<LabeledTokens> labeled;
  for (std::size_t i = 0; i < y.size(); ++i) labeled.emplace_back(pc.clean[i].tokens, y[i]);
  FeatureSpace space = fit_feature_space(pc.clean, cfg.features);
  classify::Matrix X;
  X.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) X.push_back(featurize(pc.posts[i].post, pc.clean[i], space, r));

  tr.spec = classify::ModelSpec::make(cfg.model.algorithm, cfg.model.hyperparameters);
  if (cfg.model.grid) {
    json grids = json::parse(read_file(*cfg.model.grid));
    const std::string key = classify::to_string(cfg.model.algorithm);
    if (!grids.contains(key)) throw InputError(cfg.model.grid->string() + ": no grid for " + key);
    classify::Grid g = grids.at(key);
    for (const auto& [name, value] : cfg.model.hyperparameters) g[name] = ordered_json::array({value});
    tr.grid = classify::grid_search(cfg.model.algorithm, g, X, y, cfg.model.folds, seed);
    tr.spec = tr.grid->best;
  }

  std::vector<classify::ModelSpec> specs{tr.spec};
  for (auto a : cfg.model.benchmark)
    if (a != cfg.model.algorithm) specs.push_back(classify::ModelSpec::make(a));
  tr.cv = hybrid_cross_validate(pc, y, specs, cfg, r, cfg.model.folds, seed);

  tr.bundle.lexicons = induce_lexicons(labeled, cfg.lexicon_fraction);
  tr.bundle.space = std::move(space);
  tr.bundle.model = classify::train(tr.spec, X, y, seed);
  std::vector<std::vector<std::string>> tokens;
  for (const auto& c : pc.clean) tokens.push_back(c.tokens);
  tr.bundle.word_frequencies = explain::word_frequencies(tokens);
  return tr;
}

inline ordered_json metrics_json(const classify::ClassMetrics& m) {
  ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  ordered_json undefined = ordered_json::array();
  if (m.precision_undefined) undefined.push_back("precision");
  if (m.recall_undefined) undefined.push_back("recall");
  if (m.f1_undefined) undefined.push_back("f1");
  j["undefined"] = std::move(undefined);
  return j;
}

/// Cross-validation metrics without timings, so reruns compare byte for byte.
inline ordered_json eval_report_json(const TrainResult& tr, std::uint64_t seed, double lexicon_fraction) {
  ordered_json j;
  j["seed"] = seed;
  j["folds"] = tr.folds;
  j["lexicon_fraction"] = lexicon_fraction;
  j["posts"] = tr.labels.size();
  ordered_json support;
  for (Category c : kAllCategories) support[to_string(c)] = std::count(tr.labels.begin(), tr.labels.end(), c);
  j["support"] = std::move(support);
  ordered_json models = ordered_json::array();
  for (const auto& res : tr.cv) {
    ordered_json m = res.spec.to_json();
    m["lexicon_coverage_pct"] = res.coverage_pct();
    m["macro_f1"] = classify::macro_f1(res.predictions, tr.labels);
    for (Category c : kAllCategories) m["per_class"][to_string(c)] = metrics_json(res.report[c]);
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  if (tr.grid) {
    ordered_json g;
    g["best"] = tr.grid->best.to_json();
    g["best_score"] = tr.grid->best_score;
    g["candidates"] = tr.grid->scores.size();
    j["grid_search"] = std::move(g);
  }
  return j;
}

/// Precision, recall and F1 for the drop and rise classes, as percentages.
inline std::string eval_report_csv(const TrainResult& tr) {
  std::string out =
      "model,drop_precision,rise_precision,drop_recall,rise_recall,drop_f1,rise_f1,lexicon_coverage_pct\n";
  for (const auto& res : tr.cv) {
    const auto& d = res.report[Category::Drop];
    const auto& u = res.report[Category::Rise];
    out += classify::to_string(res.spec.algorithm);
    for (double v : {d.precision, u.precision, d.recall, u.recall, d.f1, u.f1, res.coverage_pct()}) out += "," + fixed(v, 2);
    out += "\n";
  }
  return out;
}

inline ordered_json timings_json(const TrainResult& tr) {
  ordered_json rows = ordered_json::array();
  for (const auto& res : tr.cv) {
    ordered_json t;
    t["model"] = classify::to_string(res.spec.algorithm);
    t["fit_seconds"] = res.fit_seconds;
    t["predict_seconds"] = res.predict_seconds;
    rows.push_back(std::move(t));
  }
  return rows;
}

inline std::string timings_csv(const TrainResult& tr) {
  std::string out = "model,fit_seconds,predict_seconds\n";
  for (const auto& res : tr.cv)
    out += classify::to_string(res.spec.algorithm) + "," + fixed(res.fit_seconds, 4) + "," + fixed(res.predict_seconds, 4) + "\n";
  return out;
}

/// Per-advisor sample counts and drop/rise precision and recall of the
/// selected model's cross-validated predictions.
inline std::string advisor_eval_csv(const TrainResult& tr, const PreparedCorpus& pc) {
  std::map<std::string, std::vector<std::size_t>> by_advisor;
  for (std::size_t i = 0; i < pc.posts.size(); ++i) by_advisor[pc.posts[i].post.advisor_id].push_back(i);
  std::string out =
      "advisor,drop_samples,rise_samples,other_samples,drop_precision,rise_precision,drop_recall,rise_recall\n";
  for (const auto& [id, idx] : by_advisor) {
    auto truth = classify::take(tr.labels, idx);
    auto pred = classify::take(tr.cv.front().predictions, idx);
    auto rep = classify::evaluate(pred, truth);
    out += csv::quote(id);
    for (Category c : kAllCategories) out += "," + std::to_string(std::count(truth.begin(), truth.end(), c));
    auto pct = [](double v, bool undefined) { return undefined ? std::string("NA") : fixed(v, 2); };
    out += "," + pct(rep[Category::Drop].precision, rep[Category::Drop].precision_undefined);
    out += "," + pct(rep[Category::Rise].precision, rep[Category::Rise].precision_undefined);
    out += "," + pct(rep[Category::Drop].recall, rep[Category::Drop].recall_undefined);
    out += "," + pct(rep[Category::Rise].recall, rep[Category::Rise].recall_undefined);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

struct Classified {
  std::size_t index = 0;  // into the prepared corpus
  classify::HybridResult result;
  double predict_ms = 0.0;
};

inline std::vector<Classified> classify_corpus(const PreparedCorpus& pc, const ModelBundle& b, const Resources& r) {
  std::vector<Classified> out;
  out.reserve(pc.posts.size());
  for (std::size_t i = 0; i < pc.posts.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Classified c;
    c.index = i;
    c.result = classify::hybrid_classify(pc.clean[i].tokens, b.lexicons, *b.model,
                                         [&] { return featurize(pc.posts[i].post, pc.clean[i], b.space, r); });
    c.predict_ms = 1000.0 * seconds_since(t0);
    out.push_back(std::move(c));
  }
  return out;
}

inline ordered_json classification_json(const PreparedCorpus& pc, const Classified& c) {
  const Post& p = pc.posts[c.index].post;
  ordered_json j;
  j["post_id"] = p.id;
  j["advisor_id"] = p.advisor_id;
  j["published_at"] = format_timestamp(p.published_at);
  j["tickers"] = pc.clean[c.index].tickers;
  j["category"] = to_string(c.result.category);
  j["source"] = classify::to_string(c.result.source);
  j["matched_terms"] = c.result.matched_terms;
  if (c.result.prediction) {
    ordered_json s;
    for (Category k : kAllCategories) s[to_string(k)] = c.result.prediction->scores[index_of(k)];
    j["scores"] = std::move(s);
  } else {
    j["scores"] = nullptr;
  }
  return j;
}

inline std::string classifications_csv(const PreparedCorpus& pc, const std::vector<Classified>& cs) {
  std::string out = "post_id,advisor_id,category,source,tickers,matched_terms\n";
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
    return s;
  };
  for (const auto& c : cs) {
    const Post& p = pc.posts[c.index].post;
    out += csv::quote(p.id) + "," + csv::quote(p.advisor_id) + "," + to_string(c.result.category) + "," +
           classify::to_string(c.result.source) + "," + csv::quote(join(pc.clean[c.index].tickers)) + "," +
           csv::quote(join(c.result.matched_terms)) + "\n";
  }
  return out;
}

/// What verification needs from a stored classification.
struct ClassifiedRecord {
  std::string post_id;
  Category category = Category::Other;
  std::vector<std::string> tickers;
};

inline std::vector<ClassifiedRecord> read_classifications(const fs::path& path) {
  std::vector<ClassifiedRecord> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (csv::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      auto cat = parse_category(j.at("category").get<std::string>());
      if (!cat) throw InputError("unknown category");
      out.push_back({j.at("post_id").get<std::string>(), *cat, j.at("tickers").get<std::vector<std::string>>()});
    } catch (const std::exception& e) {
      throw InputError(path.string() + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification, ranking, correlation

inline std::unique_ptr<PriceProvider> make_price_provider(const PipelineConfig& c) {
  if (c.prices.provider == "http") return std::make_unique<HttpPriceProvider>(c.prices.base_url, c.prices.timeout_seconds);
  if (c.prices.dir.empty()) throw InputError("config: no price source configured");
  return std::make_unique<CsvPriceStore>(c.prices.dir.string());
}

inline std::vector<ForecastOutcome> verify_records(const std::vector<ClassifiedRecord>& records,
                                                   const PostCollection& posts, const PriceProvider& prices,
                                                   const VerificationConfig& cfg) {
  std::map<std::string, const Post*> by_id;
  for (const auto& lp : posts) by_id[lp.post.id] = &lp.post;
  std::vector<ForecastOutcome> out;
  for (const auto& rec : records) {
    auto it = by_id.find(rec.post_id);
    if (it == by_id.end()) throw InputError("classified post '" + rec.post_id + "' is not in the posts file");
    for (auto& o : verify_post(*it->second, rec.category, rec.tickers, prices, cfg)) out.push_back(std::move(o));
  }
  return out;
}

inline std::vector<ClassifiedRecord> records_of(const PreparedCorpus& pc, const std::vector<Classified>& cs) {
  std::vector<ClassifiedRecord> out;
  for (const auto& c : cs) out.push_back({pc.posts[c.index].post.id, c.result.category, pc.clean[c.index].tickers});
  return out;
}

inline std::string outcomes_jsonl(const std::vector<ForecastOutcome>& outcomes) {
  std::ostringstream ss;
  write_outcomes(ss, outcomes);
  return ss.str();
}

inline std::string outcomes_csv(const std::vector<ForecastOutcome>& outcomes) {
  std::string out = "post_id,advisor_id,ticker,category,status,baseline_close,trigger_date,reason\n";
  for (const auto& o : outcomes) {
    out += csv::quote(o.post_id) + "," + csv::quote(o.advisor_id) + "," + csv::quote(o.ticker) + "," +
           to_string(o.category) + "," + to_string(o.status) + "," +
           (o.baseline_close ? fixed(*o.baseline_close, 4) : "") + "," +
           (o.trigger_date ? format_date(*o.trigger_date) : "") + "," + csv::quote(o.reason) + "\n";
  }
  return out;
}

inline std::vector<std::string> advisor_ids(const PostCollection& posts) {
  std::set<std::string> ids;
  for (const auto& lp : posts) ids.insert(lp.post.advisor_id);
  return {ids.begin(), ids.end()};
}

inline ordered_json ranks_json(const std::vector<CredibilityRank>& ranks) {
  ordered_json a = ordered_json::array();
  for (const auto& r : ranks) {
    ordered_json j = rank_to_json(r);
    j["has_forecasts"] = r.drop_verified + r.rise_verified > 0;
    a.push_back(std::move(j));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Explanations

/// Seed for one post's explanation, independent of processing order.
inline std::uint64_t post_seed(std::uint64_t seed, const std::string& post_id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : post_id) h = (h ^ ch) * 1099511628211ULL;
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::vector<explain::Explanation> explain_corpus(const PreparedCorpus& pc, const std::vector<Classified>& cs,
                                                        const ModelBundle& b, const Resources& r,
                                                        const explain::ExplainOptions& base, std::uint64_t seed) {
  std::vector<explain::Explanation> out(cs.size());
  classify::parallel_for(cs.size(), [&](std::size_t i) {
    const Post& p = pc.posts[cs[i].index].post;
    explain::ExplainOptions opt = base;
    opt.seed = post_seed(seed, p.id);
    out[i] = explain::explain_result(p.id, p.text, cs[i].result, b.model.get(), b.space, b.word_frequencies, opt, r.tpl);
  });
  return out;
}

inline std::string explanations_jsonl(const std::vector<explain::Explanation>& es) {
  std::string out;
  for (const auto& e : es) out += e.to_json().dump() + "\n";
  return out;
}

inline std::string explanations_csv(const std::vector<explain::Explanation>& es) {
  std::string out = "post_id,category,source,text\n";
  for (const auto& e : es)
    out += csv::quote(e.post_id) + "," + to_string(e.category) + "," + classify::to_string(e.source) + "," +
           csv::quote(e.text) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Markdown summary

struct ReportInputs {
  std::optional<json> eval_report;
  std::vector<ForecastOutcome> outcomes;
  std::vector<CredibilityRank> ranks;
  std::optional<CorrelationTable> correlations;
  std::size_t posts = 0;
  std::size_t lexicon_classified = 0;
  std::size_t explanations = 0;
};

inline std::string render_report(const ReportInputs& in) {
  std::ostringstream md;
  md << "# Advisor credibility report\n\n";
  md << "Posts: " << in.posts << "\n";
  if (in.posts > 0) md << "Classified by lexicon: " << in.lexicon_classified << "\n";
  md << "Explanations: " << in.explanations << "\n\n";

  if (in.eval_report) {
    md << "## Classification metrics (lexicons + model, cross-validated)\n\n";
    md << "| Model | P drop | P rise | R drop | R rise | F1 drop | F1 rise | Lexicon coverage |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& m : in.eval_report->at("models")) {
      const auto& d = m.at("per_class").at("drop");
      const auto& u = m.at("per_class").at("rise");
      md << "| " << m.at("algorithm").get<std::string>();
      for (const json* v : {&d.at("precision"), &u.at("precision"), &d.at("recall"), &u.at("recall"), &d.at("f1"),
                            &u.at("f1"), &m.at("lexicon_coverage_pct")})
        md << " | " << fixed(v->get<double>(), 2);
      md << " |\n";
    }
    md << "\n";
  }

  std::array<std::size_t, 3> status{};
  for (const auto& o : in.outcomes) ++status[static_cast<std::size_t>(o.status)];
  md << "## Verification\n\n";
  md << "| Success | Failure | Indeterminate |\n|---|---|---|\n";
  md << "| " << status[0] << " | " << status[1] << " | " << status[2] << " |\n\n";

  md << "## Advisors' rankings (prediction quality, %)\n\n";
  md << "| Advisor | Drop | Rise | Global | Drop verified | Rise verified | Indeterminate |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : in.ranks)
    md << "| " << r.advisor_id << " | " << format_percent(r.drop_quality) << " | " << format_percent(r.rise_quality)
       << " | " << format_percent(r.global_quality) << " | " << r.drop_verified << " | " << r.rise_verified << " | "
       << r.indeterminate << " |\n";
  md << "\n";

  if (in.correlations) {
    md << "## Correlations between social network metrics and quality rankings (" << to_string(in.correlations->method)
       << ")\n\n";
    md << "| Social metric | Statistic | Drop | Rise | Global |\n|---|---|---|---|---|\n";
    const auto& rows = metric_rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      md << "| " << rows[i].group << " | " << rows[i].stat;
      for (std::size_t q = 0; q < kQualityColumns.size(); ++q) md << " | " << format_correlation(in.correlations->cells[i][q]);
      md << " |\n";
    }
    md << "\n";
  }
  return md.str();
}

}  // namespace credscore::pipeline
