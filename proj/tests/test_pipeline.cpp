#include <sys/wait.h>
#include <unistd.h>

#include <catch_amalgamated.hpp>

#include "credscore/prices.hpp"

#include "credscore/demo.hpp"
#include "credscore/pipeline.hpp"

using namespace credscore;
using namespace credscore::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("credscore_pipeline_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Small, fast fixture: 120 posts, 5 folds, a 40-tree forest.
fs::path small_fixture(const std::string& name) {
  fs::path dir = scratch(name);
  demo::DemoOptions opt;
  opt.posts = 120;
  opt.advisors = 6;
  demo::write_fixture(demo::make_fixture(opt), dir);
  auto cfg = demo::demo_config();
  cfg["model"] = {{"algorithm", "rf"}, {"hyperparameters", {{"n_estimators", 40}}}, {"folds", 5}, {"benchmark", {"mnb"}}};
  cfg["explain"] = {{"samples", 100}, {"top_k", 5}};
  demo::write_text(dir / "config.json", cfg.dump(2));
  return dir;
}

struct CmdResult {
  int code;
  std::string output;
};

CmdResult run_cli(const std::string& args, const std::map<std::string, std::string>& env = {}) {
  std::string cmd;
  for (const auto& [k, v] : env) cmd += k + "='" + v + "' ";
  cmd += std::string(CREDSCORE_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("config paths resolve against the config directory", "[pipeline][config]") {
  fs::path dir = small_fixture("config");
  auto cfg = load_config(dir / "config.json");
  CHECK(cfg.posts == (dir / "posts.jsonl").lexically_normal());
  CHECK(cfg.prices.dir == (dir / "prices").lexically_normal());
  CHECK(cfg.out == (dir / "out").lexically_normal());
  CHECK(cfg.model.folds == 5);
  CHECK(cfg.model.hyperparameters.at("n_estimators") == 40);
  CHECK(cfg.verification.threshold == 0.03);
  CHECK(cfg.features.char_grams == VectorizerConfig::tuned_char());
  CHECK(cfg.input_files().size() == 10);
}

TEST_CASE("config errors are input errors", "[pipeline][config]") {
  fs::path dir = small_fixture("config_errors");
  auto with = [&](const std::string& key, const nlohmann::json& value) {
    auto j = nlohmann::json::parse(read_file(dir / "config.json"));
    j[key] = value;
    return j.dump();
  };
  fs::path p = dir / "config.json";
  CHECK_THROWS_WITH(parse_config(with("colour", 1), p), Catch::Matchers::ContainsSubstring("unknown key 'colour'"));
  CHECK_THROWS_WITH(parse_config(with("posts", "missing.jsonl"), p), Catch::Matchers::ContainsSubstring("does not exist"));
  CHECK_THROWS_AS(parse_config(with("model", {{"algorithm", "svm"}}), p), InputError);
  CHECK_THROWS_AS(parse_config(with("model", {{"hyperparameters", {{"alpha", -1}}}, {"algorithm", "mnb"}}), p), InputError);
  CHECK_THROWS_AS(parse_config(with("verification", {{"threshold", 1.5}}), p), InputError);
  CHECK_THROWS_AS(parse_config(with("features", {{"word", {{"min_df", 0.5}, {"max_df", 0.4}}}}), p), InputError);
  CHECK_THROWS_AS(parse_config(with("explain", {{"samples", 10}}), p), InputError);
  CHECK_THROWS_AS(parse_config("{not json", p), InputError);
}

TEST_CASE("training on a synthetic corpus populates every report column", "[pipeline][train]") {
  fs::path dir = small_fixture("train");
  auto cfg = load_config(dir / "config.json");
  auto res = load_resources(cfg);
  auto pc = prepare(load_posts(cfg.posts.string()), res);
  auto tr = train_pipeline(cfg, res, pc, 42);

  REQUIRE(tr.cv.size() == 2);
  CHECK(tr.cv[0].spec.algorithm == classify::Algorithm::RF);
  CHECK(tr.cv[1].spec.algorithm == classify::Algorithm::MNB);
  for (const auto& r : tr.cv) {
    CHECK(r.predictions.size() == 120);
    CHECK(r.lexicon_hits > 0);
    CHECK(r.fit_seconds > 0.0);
    CHECK(r.predict_seconds >= 0.0);
    for (Category c : {Category::Drop, Category::Rise}) {
      CHECK_FALSE(r.report[c].precision_undefined);
      CHECK_FALSE(r.report[c].recall_undefined);
      CHECK(r.report[c].f1 > 0.0);
    }
  }
  // lexicon hits are identical across models: both share the folds
  CHECK(tr.cv[0].lexicon_hits == tr.cv[1].lexicon_hits);

  std::string csv = eval_report_csv(tr);
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "model,drop_precision,rise_precision,drop_recall,rise_recall,drop_f1,rise_f1,lexicon_coverage_pct");
  std::size_t rows = 0;
  while (std::getline(lines, row)) {
    auto f = csv::split_line(row);
    REQUIRE(f.size() == 8);
    for (std::size_t i = 1; i < f.size(); ++i) CHECK_NOTHROW(csv::parse_number(f[i], "cell"));
    ++rows;
  }
  CHECK(rows == 2);
  CHECK(timings_csv(tr).rfind("model,fit_seconds,predict_seconds\n", 0) == 0);

  SECTION("bundle round trip predicts identically") {
    fs::path mdir = scratch("bundle");
    tr.bundle.save(mdir);
    auto loaded = ModelBundle::load(mdir);
    CHECK(loaded.space.dimension() == tr.bundle.space.dimension());
    CHECK(loaded.lexicons.to_json() == tr.bundle.lexicons.to_json());
    auto a = classify_corpus(pc, tr.bundle, res);
    auto b = classify_corpus(pc, loaded, res);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].result.category == b[i].result.category);
      if (a[i].result.prediction) CHECK(a[i].result.prediction->scores == b[i].result.prediction->scores);
    }
  }

  SECTION("every classified post gets an explanation matching its source") {
    auto cs = classify_corpus(pc, tr.bundle, res);
    auto es = explain_corpus(pc, cs, tr.bundle, res, cfg.explain, 42);
    REQUIRE(es.size() == cs.size());
    for (std::size_t i = 0; i < es.size(); ++i) {
      CHECK(es[i].category == cs[i].result.category);
      if (cs[i].result.source == classify::Source::Lexicon)
        CHECK_FALSE(es[i].terms.empty());
      else
        CHECK(es[i].terms.size() + es[i].features.size() > 0);
      CHECK(es[i].text.rfind("The classification of the post \"", 0) == 0);
    }
    auto again = explain_corpus(pc, cs, tr.bundle, res, cfg.explain, 42);
    CHECK(explanations_jsonl(es) == explanations_jsonl(again));
  }
}

TEST_CASE("train reports missing labels by post id with exit code 2", "[pipeline][cli]") {
  fs::path dir = small_fixture("nolabel");
  auto posts = load_posts((dir / "posts.jsonl").string());
  posts[7].label.reset();
  save_posts((dir / "posts.jsonl").string(), posts);
  auto r = run_cli("train --config " + (dir / "config.json").string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("post '" + posts[7].post.id + "' has no label"));
}

TEST_CASE("usage errors exit with code 2", "[pipeline][cli]") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("train").code == 2);
  CHECK(run_cli("rank --config /nonexistent/config.json").code == 2);
}

TEST_CASE("cli end to end: train, assess, single commands, determinism", "[pipeline][cli]") {
  fs::path dir = small_fixture("e2e");
  const std::string config = " --config " + (dir / "config.json").string();
  const fs::path model = dir / "train" / "model";

  auto t1 = run_cli("train" + config + " --out " + (dir / "train").string());
  REQUIRE(t1.code == 0);
  std::string report1 = read_file(dir / "train" / "eval_report.json");
  auto t2 = run_cli("train" + config + " --out " + (dir / "train2").string());
  REQUIRE(t2.code == 0);
  CHECK(report1 == read_file(dir / "train2" / "eval_report.json"));
  CHECK(read_file(dir / "train" / "eval_report.csv") == read_file(dir / "train2" / "eval_report.csv"));
  for (const char* f : ModelBundle::kFiles) CHECK(read_file(model / f) == read_file(dir / "train2" / "model" / f));
  CHECK(fs::exists(dir / "train" / "run" / "timings.json"));

  auto a = run_cli("assess" + config + " --out " + (dir / "a").string() + " --model " + model.string());
  REQUIRE(a.code == 0);
  for (const char* f : {"classifications.jsonl", "classifications.csv", "outcomes.jsonl", "outcomes.csv",
                        "rankings.csv", "rankings.json", "correlations.csv", "correlations.json",
                        "explanations.jsonl", "explanations.csv", "report.md", "report.json", "manifest_assess.json"})
    CHECK(fs::exists(dir / "a" / f));

  SECTION("unpriced tickers are indeterminate and the run continues") {
    auto outcomes = read_outcomes((dir / "a" / "outcomes.jsonl").string());
    auto posts = load_posts((dir / "posts.jsonl").string());
    CHECK(outcomes.size() >= posts.size());
    bool mentioned = false, reported = false;
    for (const auto& lp : posts) mentioned = mentioned || lp.post.text.find("$ZZZZ") != std::string::npos;
    for (const auto& o : outcomes) {
      if (o.ticker != demo::kUnpricedTicker) continue;
      reported = true;
      CHECK(o.status == OutcomeStatus::Indeterminate);
      if (o.category != Category::Other) CHECK(o.reason == reason::kNoPriceData);
    }
    CHECK(mentioned == reported);
  }

  SECTION("advisors without verified forecasts are ranked with absent qualities") {
    auto j = nlohmann::json::parse(read_file(dir / "a" / "rankings.json"));
    CHECK(j.size() == 6);
    for (const auto& r : j) {
      bool any = r["drop_verified"].get<int>() + r["rise_verified"].get<int>() > 0;
      CHECK(r["has_forecasts"] == any);
      CHECK(r["global_quality"].is_null() == !any);
    }
    auto ranks = rank_advisors({}, {"adv99"});
    REQUIRE(ranks.size() == 1);
    CHECK_FALSE(ranks[0].global_quality.has_value());
    CHECK(ranks_to_csv(ranks).find("adv99,NA,NA,NA,0,0,0") != std::string::npos);
  }

  SECTION("correlation report has the social metric table shape") {
    std::string csv = read_file(dir / "a" / "correlations.csv");
    CHECK(csv.rfind("social_metric,statistic,drop,rise,global\nFollowers,Num.,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  }

  SECTION("manifest records digests without absolute output paths") {
    std::string text = read_file(dir / "a" / "manifest_assess.json");
    auto m = nlohmann::json::parse(text);
    CHECK(m["seed"] == 42);
    CHECK(m["config_sha256"].get<std::string>().size() == 64);
    CHECK(m["outputs"].contains("report.md"));
    CHECK(m["model"].contains("model.json"));
    CHECK(text.find((dir / "a").string()) == std::string::npos);
  }

  SECTION("same seed reproduces the bundle, another seed changes explanations only") {
    REQUIRE(run_cli("assess" + config + " --out " + (dir / "b").string() + " --model " + model.string()).code == 0);
    for (const auto& e : fs::directory_iterator(dir / "a"))
      if (e.is_regular_file()) CHECK(read_file(e.path()) == read_file(dir / "b" / e.path().filename()));
    REQUIRE(run_cli("assess" + config + " --seed 7 --out " + (dir / "c").string() + " --model " + model.string()).code == 0);
    CHECK(read_file(dir / "a" / "outcomes.jsonl") == read_file(dir / "c" / "outcomes.jsonl"));
    CHECK(nlohmann::json::parse(read_file(dir / "c" / "manifest_assess.json"))["seed"] == 7);
  }

  SECTION("single-step commands reproduce assess") {
    const std::string common = config + " --out " + (dir / "s").string() + " --model " + model.string();
    for (const char* cmd : {"ingest", "classify", "verify", "rank", "correlate", "explain", "report"})
      REQUIRE(run_cli(std::string(cmd) + common).code == 0);
    for (const char* f : {"classifications.jsonl", "outcomes.jsonl", "rankings.csv", "correlations.csv",
                          "explanations.jsonl", "report.md"})
      CHECK(read_file(dir / "s" / f) == read_file(dir / "a" / f));
    CHECK(fs::exists(dir / "s" / "clean_posts.jsonl"));
  }

  SECTION("--explain-only prints one explanation") {
    auto r = run_cli("assess" + config + " --out " + (dir / "one").string() + " --model " + model.string() +
                     " --explain-only p003");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.output);
    CHECK(j["post_id"] == "p003");
    CHECK_FALSE(fs::exists(dir / "one" / "report.md"));
    CHECK(run_cli("explain" + config + " --model " + model.string() + " --explain-only nope").code == 2);
  }

  SECTION("verify can fetch prices over HTTP with the base URL from the environment") {
    httplib::Server srv;
    fs::path prices = dir / "prices";
    srv.Get(R"(/api/prices/([A-Z]+))", [&](const httplib::Request& req, httplib::Response& res) {
      fs::path f = prices / (req.matches[1].str() + ".csv");
      if (!fs::exists(f)) {
        res.status = 404;
        return;
      }
      auto s = load_price_csv(f.string(), req.matches[1].str());
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& b : s.bars)
        arr.push_back({{"date", format_date(b.date)}, {"open", b.open}, {"high", b.high}, {"low", b.low}, {"close", b.close}});
      res.set_content(arr.dump(), "application/json");
    });
    int port = srv.bind_to_any_port("127.0.0.1");
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();

    auto j = nlohmann::json::parse(read_file(dir / "config.json"));
    j["prices"] = {{"provider", "http"}, {"base_url", "http://127.0.0.1:1/unused"}};
    demo::write_text(dir / "http_config.json", j.dump());
    fs::path h = dir / "h";
    fs::create_directories(h);
    fs::copy_file(dir / "a" / "classifications.jsonl", h / "classifications.jsonl");
    auto r = run_cli("verify --config " + (dir / "http_config.json").string() + " --out " + h.string(),
                     {{kPriceBaseUrlEnv, "http://127.0.0.1:" + std::to_string(port) + "/api"}});
    srv.stop();
    th.join();
    REQUIRE(r.code == 0);
    CHECK(read_file(h / "outcomes.jsonl") == read_file(dir / "a" / "outcomes.jsonl"));
  }
}
