#include <openssl/evp.h>

#include <iostream>

#include <CLI11.hpp>

#include "credscore/pipeline.hpp"

namespace fs = std::filesystem;
using namespace credscore;
using namespace credscore::pipeline;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string portable(const fs::path& p, const fs::path& base) {
  fs::path rel = p.lexically_relative(base);
  return (rel.empty() ? p : rel).generic_string();
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string model;
  std::string algo;
  std::string grid;
  std::optional<std::size_t> folds;
  std::string explain_only;
};

/// Everything a subcommand needs, plus the digests for its manifest.
class Run {
 public:
  Run(std::string command, const Options& o) : command_(std::move(command)) {
    cfg = load_config(o.config);
    seed = o.seed.value_or(cfg.seed);
    out = o.out.empty() ? cfg.out : fs::path(o.out).lexically_normal();
    model_dir = !o.model.empty() ? fs::path(o.model) : cfg.model_dir ? *cfg.model_dir : out / "model";
  }

  PipelineConfig cfg;
  std::uint64_t seed = 0;
  fs::path out;
  fs::path model_dir;

  const Resources& resources() {
    if (!resources_) resources_ = load_resources(cfg);
    return *resources_;
  }

  PreparedCorpus corpus() { return prepare(load_posts(cfg.posts.string()), resources()); }

  ModelBundle bundle() {
    ModelBundle b = ModelBundle::load(model_dir);
    for (const char* f : ModelBundle::kFiles) model_digests_[f] = sha256_hex(read_file(model_dir / f));
    return b;
  }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(out / name, content);
    outputs_[name] = sha256_hex(content);
  }

  /// Run-specific measurements; kept out of the manifest so reruns match.
  void write_timing(const std::string& name, const std::string& content) { write_file_atomic(out / "run" / name, content); }

  void note_price_inputs() { use_prices_ = true; }

  void finish(const std::vector<std::string>& extra_inputs = {}) {
    ordered_json m;
    m["command"] = command_;
    m["config"] = portable(cfg.path, cfg.base_dir);
    m["config_sha256"] = sha256_hex(cfg.text);
    m["seed"] = seed;
    ordered_json seeds;
    seeds["folds"] = seed;
    seeds["model"] = seed;
    seeds["explain"] = seed;
    m["seeds"] = seeds;
    ordered_json inputs = ordered_json::array();
    auto add_input = [&](const fs::path& p) {
      ordered_json i;
      i["path"] = portable(p, cfg.base_dir);
      i["sha256"] = sha256_hex(read_file(p));
      inputs.push_back(std::move(i));
    };
    for (const auto& p : cfg.input_files()) add_input(p);
    if (cfg.model.grid) add_input(*cfg.model.grid);
    if (use_prices_) {
      if (cfg.prices.provider == "csv") {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(cfg.prices.dir))
          if (e.path().extension() == ".csv") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) add_input(p);
      } else {
        const char* env = std::getenv(kPriceBaseUrlEnv);
        m["price_base_url"] = env && *env ? env : cfg.prices.base_url;
      }
    }
    for (const auto& p : extra_inputs) add_input(out / p);
    m["inputs"] = std::move(inputs);
    if (!model_digests_.empty()) {
      ordered_json md = ordered_json::object();
      for (const auto& [f, h] : model_digests_) md[f] = h;
      m["model"] = std::move(md);
    }
    ordered_json outs = ordered_json::object();
    for (const auto& [f, h] : outputs_) outs[f] = h;
    m["outputs"] = std::move(outs);
    write_file_atomic(out / ("manifest_" + command_ + ".json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::optional<Resources> resources_;
  std::map<std::string, std::string> model_digests_;
  std::map<std::string, std::string> outputs_;
  bool use_prices_ = false;
};

std::string jsonl(const PreparedCorpus& pc, const std::vector<Classified>& cs) {
  std::string s;
  for (const auto& c : cs) s += classification_json(pc, c).dump() + "\n";
  return s;
}

ordered_json predict_timing(const std::vector<Classified>& cs) {
  double sum = 0.0, mx = 0.0;
  for (const auto& c : cs) {
    sum += c.predict_ms;
    mx = std::max(mx, c.predict_ms);
  }
  ordered_json t;
  t["posts"] = cs.size();
  t["predict_ms_mean"] = cs.empty() ? 0.0 : sum / static_cast<double>(cs.size());
  t["predict_ms_max"] = mx;
  return t;
}

std::size_t lexicon_count(const std::vector<Classified>& cs) {
  return static_cast<std::size_t>(std::count_if(
      cs.begin(), cs.end(), [](const Classified& c) { return c.result.source == classify::Source::Lexicon; }));
}

std::optional<CorrelationTable> correlations(Run& run, const std::vector<CredibilityRank>& ranks) {
  if (!run.cfg.social_metrics) return std::nullopt;
  auto metrics = load_social_metrics(run.cfg.social_metrics->string());
  auto table = correlate_metrics(ranks, metrics, run.cfg.correlation);
  run.write("correlations.csv", correlation_table_csv(table));
  run.write("correlations.json", correlation_table_json(table).dump(2) + "\n");
  return table;
}

std::vector<CredibilityRank> write_ranks(Run& run, const std::vector<ForecastOutcome>& outcomes,
                                         const PostCollection& posts) {
  auto ranks = rank_advisors(outcomes, advisor_ids(posts));
  run.write("rankings.csv", ranks_to_csv(ranks));
  run.write("rankings.json", ranks_json(ranks).dump(2) + "\n");
  return ranks;
}

std::optional<json> stored_eval_report(const fs::path& model_dir) {
  fs::path p = model_dir / "eval_report.json";
  if (!fs::exists(p)) return std::nullopt;
  return json::parse(read_file(p));
}

void write_report(Run& run, const ReportInputs& in) {
  run.write("report.md", render_report(in));
  ordered_json j;
  j["posts"] = in.posts;
  j["lexicon_classified"] = in.lexicon_classified;
  j["explanations"] = in.explanations;
  ordered_json status;
  for (auto s : {OutcomeStatus::Success, OutcomeStatus::Failure, OutcomeStatus::Indeterminate})
    status[to_string(s)] = std::count_if(in.outcomes.begin(), in.outcomes.end(),
                                         [&](const ForecastOutcome& o) { return o.status == s; });
  j["outcomes"] = std::move(status);
  j["rankings"] = ranks_json(in.ranks);
  if (in.correlations) j["correlations"] = correlation_table_json(*in.correlations);
  if (in.eval_report) j["classification"] = *in.eval_report;
  run.write("report.json", j.dump(2) + "\n");
}

int explain_one(Run& run, const PreparedCorpus& pc, const ModelBundle& b, const std::string& post_id) {
  for (std::size_t i = 0; i < pc.posts.size(); ++i) {
    if (pc.posts[i].post.id != post_id) continue;
    PreparedCorpus one;
    one.posts = {pc.posts[i]};
    one.clean = {pc.clean[i]};
    auto cs = classify_corpus(one, b, run.resources());
    auto es = explain_corpus(one, cs, b, run.resources(), run.cfg.explain, run.seed);
    std::cout << es.front().to_json().dump() << "\n";
    return 0;
  }
  throw InputError("post '" + post_id + "' not found");
}

// ---------------------------------------------------------------------------

int cmd_ingest(Run& run) {
  auto pc = run.corpus();
  std::string clean;
  std::map<std::string, std::size_t> labels, tickers;
  std::set<std::string> advisors;
  std::size_t no_ticker = 0;
  for (std::size_t i = 0; i < pc.posts.size(); ++i) {
    const auto& lp = pc.posts[i];
    ordered_json j;
    j["id"] = lp.post.id;
    j["advisor_id"] = lp.post.advisor_id;
    j["label"] = lp.label ? json(to_string(*lp.label)) : json();
    j["tickers"] = pc.clean[i].tickers;
    j["tokens"] = pc.clean[i].tokens;
    j["clean_text"] = pc.clean[i].clean_text;
    clean += j.dump() + "\n";
    ++labels[lp.label ? to_string(*lp.label) : "unlabeled"];
    advisors.insert(lp.post.advisor_id);
    for (const auto& t : pc.clean[i].tickers) ++tickers[t];
    if (pc.clean[i].tickers.empty()) ++no_ticker;
  }
  run.write("clean_posts.jsonl", clean);
  ordered_json s;
  s["posts"] = pc.posts.size();
  s["advisors"] = advisors.size();
  s["labels"] = labels;
  s["posts_without_ticker"] = no_ticker;
  s["ticker_mentions"] = tickers;
  run.write("ingest_summary.json", s.dump(2) + "\n");
  std::string csv = "label,posts\n";
  for (const auto& [l, n] : labels) csv += l + "," + std::to_string(n) + "\n";
  run.write("ingest_summary.csv", csv);
  run.finish();
  std::cout << "ingested " << pc.posts.size() << " posts from " << advisors.size() << " advisors\n";
  return 0;
}

int cmd_train(Run& run, const Options& o) {
  if (!o.algo.empty()) {
    run.cfg.model.algorithm = classify::parse_algorithm(o.algo);
    run.cfg.model.hyperparameters.clear();
  }
  if (!o.grid.empty()) {
    if (!fs::exists(o.grid)) throw InputError("grid file '" + o.grid + "' does not exist");
    run.cfg.model.grid = fs::path(o.grid);
  }
  if (o.folds) {
    if (*o.folds < 2) throw InputError("--folds must be at least 2");
    run.cfg.model.folds = *o.folds;
  }
  auto pc = run.corpus();
  auto tr = train_pipeline(run.cfg, run.resources(), pc, run.seed);
  tr.bundle.save(run.model_dir);
  std::string eval = eval_report_json(tr, run.seed, run.cfg.lexicon_fraction).dump(2) + "\n";
  write_file_atomic(run.model_dir / "eval_report.json", eval);
  run.write("eval_report.json", eval);
  run.write("eval_report.csv", eval_report_csv(tr));
  run.write("eval_by_advisor.csv", advisor_eval_csv(tr, pc));
  run.write("lexicons.json", tr.bundle.lexicons.to_json().dump(2) + "\n");
  if (tr.grid) {
    ordered_json g = ordered_json::array();
    for (const auto& [spec, score] : tr.grid->scores) {
      ordered_json row = spec.to_json();
      row["macro_f1"] = score;
      g.push_back(std::move(row));
    }
    run.write("grid_search.json", g.dump(2) + "\n");
  }
  run.write_timing("timings.json", timings_json(tr).dump(2) + "\n");
  run.write_timing("timings.csv", timings_csv(tr));
  run.finish();
  const auto& best = tr.cv.front();
  std::cout << "trained " << classify::to_string(tr.spec.algorithm) << " on " << tr.labels.size()
            << " posts; cv drop F1 " << fixed(best.report[Category::Drop].f1, 2) << "%, rise F1 "
            << fixed(best.report[Category::Rise].f1, 2) << "%, lexicon coverage " << fixed(best.coverage_pct(), 2)
            << "%\n";
  return 0;
}

int cmd_classify(Run& run) {
  auto b = run.bundle();
  auto pc = run.corpus();
  auto cs = classify_corpus(pc, b, run.resources());
  run.write("classifications.jsonl", jsonl(pc, cs));
  run.write("classifications.csv", classifications_csv(pc, cs));
  run.write_timing("timings.json", predict_timing(cs).dump(2) + "\n");
  run.finish();
  std::cout << "classified " << cs.size() << " posts (" << lexicon_count(cs) << " by lexicon)\n";
  return 0;
}

std::vector<ForecastOutcome> read_outcomes_or_explain(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("'" + p.string() + "' not found; run verify first");
  return read_outcomes(p.string());
}

int cmd_verify(Run& run) {
  fs::path cls = run.out / "classifications.jsonl";
  if (!fs::exists(cls)) throw InputError("'" + cls.string() + "' not found; run classify first");
  auto records = read_classifications(cls);
  auto posts = load_posts(run.cfg.posts.string());
  auto provider = make_price_provider(run.cfg);
  run.note_price_inputs();
  auto outcomes = verify_records(records, posts, *provider, run.cfg.verification);
  run.write("outcomes.jsonl", outcomes_jsonl(outcomes));
  run.write("outcomes.csv", outcomes_csv(outcomes));
  run.finish({"classifications.jsonl"});
  std::cout << "verified " << outcomes.size() << " forecasts\n";
  return 0;
}

int cmd_rank(Run& run) {
  auto outcomes = read_outcomes_or_explain(run.out / "outcomes.jsonl");
  auto ranks = write_ranks(run, outcomes, load_posts(run.cfg.posts.string()));
  run.finish({"outcomes.jsonl"});
  std::cout << "ranked " << ranks.size() << " advisors\n";
  return 0;
}

int cmd_correlate(Run& run) {
  if (!run.cfg.social_metrics) throw InputError("config: social_metrics is required for correlate");
  auto outcomes = read_outcomes_or_explain(run.out / "outcomes.jsonl");
  auto ranks = rank_advisors(outcomes, advisor_ids(load_posts(run.cfg.posts.string())));
  correlations(run, ranks);
  run.finish({"outcomes.jsonl"});
  std::cout << "correlated " << metric_rows().size() << " social metrics with " << ranks.size() << " advisors\n";
  return 0;
}

int cmd_explain(Run& run, const Options& o) {
  auto b = run.bundle();
  auto pc = run.corpus();
  if (!o.explain_only.empty()) return explain_one(run, pc, b, o.explain_only);
  auto cs = classify_corpus(pc, b, run.resources());
  auto es = explain_corpus(pc, cs, b, run.resources(), run.cfg.explain, run.seed);
  run.write("explanations.jsonl", explanations_jsonl(es));
  run.write("explanations.csv", explanations_csv(es));
  run.finish();
  std::cout << "explained " << es.size() << " posts\n";
  return 0;
}

int cmd_report(Run& run) {
  ReportInputs in;
  in.eval_report = stored_eval_report(run.model_dir);
  in.outcomes = read_outcomes_or_explain(run.out / "outcomes.jsonl");
  auto posts = load_posts(run.cfg.posts.string());
  in.posts = posts.size();
  in.ranks = rank_advisors(in.outcomes, advisor_ids(posts));
  std::vector<std::string> used{"outcomes.jsonl"};
  if (run.cfg.social_metrics)
    in.correlations = correlate_metrics(in.ranks, load_social_metrics(run.cfg.social_metrics->string()), run.cfg.correlation);
  if (fs::path p = run.out / "classifications.jsonl"; fs::exists(p)) {
    std::istringstream ss(read_file(p));
    for (std::string line; std::getline(ss, line);)
      if (!csv::trim(line).empty() && json::parse(line).at("source") == "lexicon") ++in.lexicon_classified;
    used.push_back("classifications.jsonl");
  }
  if (fs::path p = run.out / "explanations.jsonl"; fs::exists(p)) {
    std::istringstream ss(read_file(p));
    for (std::string line; std::getline(ss, line);)
      if (!csv::trim(line).empty()) ++in.explanations;
    used.push_back("explanations.jsonl");
  }
  write_report(run, in);
  run.finish(used);
  std::cout << "wrote " << (run.out / "report.md").string() << "\n";
  return 0;
}

int cmd_assess(Run& run, const Options& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto b = run.bundle();
  auto pc = run.corpus();
  if (!o.explain_only.empty()) return explain_one(run, pc, b, o.explain_only);
  auto provider = make_price_provider(run.cfg);
  run.note_price_inputs();

  auto cs = classify_corpus(pc, b, run.resources());
  run.write("classifications.jsonl", jsonl(pc, cs));
  run.write("classifications.csv", classifications_csv(pc, cs));

  ReportInputs in;
  in.posts = pc.posts.size();
  in.lexicon_classified = lexicon_count(cs);
  in.outcomes = verify_records(records_of(pc, cs), pc.posts, *provider, run.cfg.verification);
  run.write("outcomes.jsonl", outcomes_jsonl(in.outcomes));
  run.write("outcomes.csv", outcomes_csv(in.outcomes));
  in.ranks = write_ranks(run, in.outcomes, pc.posts);
  in.correlations = correlations(run, in.ranks);

  auto te = std::chrono::steady_clock::now();
  auto es = explain_corpus(pc, cs, b, run.resources(), run.cfg.explain, run.seed);
  double explain_seconds = seconds_since(te);
  run.write("explanations.jsonl", explanations_jsonl(es));
  run.write("explanations.csv", explanations_csv(es));
  in.explanations = es.size();
  in.eval_report = stored_eval_report(run.model_dir);
  write_report(run, in);

  ordered_json t = predict_timing(cs);
  t["explain_seconds"] = explain_seconds;
  t["total_seconds"] = seconds_since(t0);
  run.write_timing("timings.json", t.dump(2) + "\n");
  run.finish();
  std::cout << "assessed " << pc.posts.size() << " posts, " << in.outcomes.size() << " outcomes, " << in.ranks.size()
            << " advisors; report in " << (run.out / "report.md").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Advisor credibility scoring from financial social-media posts"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "overrides the configured seed");
    sub->add_option("--out", o.out, "output directory (default: configured out)");
    sub->add_option("--model", o.model, "model bundle directory (default: <out>/model)");
  };
  std::map<std::string, CLI::App*> subs;
  for (auto [name, help] : std::vector<std::pair<const char*, const char*>>{
           {"ingest", "parse and preprocess posts"},
           {"train", "induce lexicons, cross-validate and fit the model"},
           {"classify", "classify all posts with lexicons and model"},
           {"verify", "check classified forecasts against prices"},
           {"rank", "per-advisor credibility rankings"},
           {"correlate", "correlate rankings with social metrics"},
           {"explain", "natural-language explanations"},
           {"report", "markdown and JSON summary of a run"},
           {"assess", "classify, verify, rank, correlate, explain and report"}}) {
    subs[name] = app.add_subcommand(name, help);
    common(subs[name]);
  }
  subs["train"]->add_option("--algo", o.algo, "mnb, cnb, knn, dt or rf");
  subs["train"]->add_option("--grid", o.grid, "hyperparameter grid file keyed by algorithm");
  subs["train"]->add_option("--folds", o.folds, "cross-validation folds");
  for (const char* s : {"explain", "assess"})
    subs[s]->add_option("--explain-only", o.explain_only, "print the explanation of one post and stop");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Run run(name, o);
    if (name == "ingest") return cmd_ingest(run);
    if (name == "train") return cmd_train(run, o);
    if (name == "classify") return cmd_classify(run);
    if (name == "verify") return cmd_verify(run);
    if (name == "rank") return cmd_rank(run);
    if (name == "correlate") return cmd_correlate(run);
    if (name == "explain") return cmd_explain(run, o);
    if (name == "report") return cmd_report(run);
    return cmd_assess(run, o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
