#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "credscore/classify.hpp"
#include "credscore/explain.hpp"

using namespace credscore;
using namespace credscore::explain;
using Catch::Approx;
using Strings = std::vector<std::string>;

TEST_CASE("perturb") {
  Vector x{0, 2, 0, 1.5, 3, 0};
  auto p = perturb(x, 1000, 17);
  CHECK(p.active == std::vector<std::size_t>{1, 3, 4});
  REQUIRE(p.samples.size() == 1000);
  CHECK(p.samples[0] == x);
  CHECK(p.masks[0] == std::vector<std::uint8_t>{1, 1, 1});
  for (std::size_t s = 0; s < p.samples.size(); ++s) {
    for (std::size_t a = 0; a < 3; ++a)
      CHECK(p.samples[s][p.active[a]] == (p.masks[s][a] ? x[p.active[a]] : 0.0));
    CHECK(p.samples[s][0] == 0.0);
  }
  for (std::size_t a = 0; a < 3; ++a) {
    std::size_t absent = 0;
    for (const auto& m : p.masks) absent += m[a] == 0;
    CHECK(absent >= 450);
    CHECK(absent <= 550);
  }
  auto again = perturb(x, 1000, 17);
  CHECK(again.masks == p.masks);
  CHECK(perturb(x, 1000, 18).masks != p.masks);
  CHECK_THROWS_WITH(perturb(Vector(4, 0.0), 100, 0), "nothing to perturb");
  CHECK_THROWS_AS(perturb(x, 10, 0), InputError);
}

TEST_CASE("surrogate recovers planted linear models (property)") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> m_dist(2, 15);
  std::uniform_real_distribution<double> mag(0.05, 1.0), intercept(-1, 1);
  std::bernoulli_distribution sign(0.5);
  int matched = 0;
  for (int model = 0; model < 100; ++model) {
    const std::size_t m = static_cast<std::size_t>(m_dist(rng));
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
    bool same = true;
    for (std::size_t i = 0; i < k; ++i) same = same && t.items[i].index == f.items[i].index;
    matched += same;
  }
  CHECK(matched >= 95);
}

TEST_CASE("surrogate edge cases") {
  auto p = perturb(Vector{1, 1, 1}, 200, 3);
  for (auto& m : p.masks) m[1] = 1;  // feature 1 never varies
  Vector targets;
  for (const auto& m : p.masks) targets.push_back(0.3 * m[0] - 0.7 * m[2]);
  Vector beta = fit_surrogate(p.masks, targets);
  CHECK(beta[1] == 0.0);
  CHECK(beta[0] == Approx(0.3).margin(1e-2));
  CHECK(beta[2] == Approx(-0.7).margin(1e-2));

  // duplicating every sample leaves the minimizer unchanged
  auto masks2 = p.masks;
  masks2.insert(masks2.end(), p.masks.begin(), p.masks.end());
  Vector targets2 = targets;
  targets2.insert(targets2.end(), targets.begin(), targets.end());
  Vector beta2 = fit_surrogate(masks2, targets2);
  for (std::size_t a = 0; a < 3; ++a) CHECK(beta2[a] == Approx(beta[a]).margin(1e-12));

  // more features than samples stays solvable
  auto wide = perturb(Vector(80, 1.0), 50, 1);
  Vector t(50, 0.0);
  for (std::size_t s = 0; s < 50; ++s) t[s] = wide.masks[s][0];
  Vector b = fit_surrogate(wide.masks, t);
  CHECK(std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); }));
  CHECK_THROWS_AS(fit_surrogate(p.masks, Vector{1}), InputError);
}

TEST_CASE("top_features") {
  std::vector<Attribution> w{{0, "a", 2}, {1, "b", -3}, {2, "c", 1}};
  auto top = top_features(w, 2);
  REQUIRE(top.items.size() == 2);
  CHECK(top.items[0].name == "b");
  CHECK(top.items[1].name == "a");
  CHECK_FALSE(top.all_zero);
  CHECK(top_features(w, 10).items.size() == 3);
  auto zero = top_features({{5, "x", 0}, {2, "y", 0}, {9, "z", 0}}, 2);
  CHECK(zero.all_zero);
  CHECK(zero.items[0].name == "y");
  CHECK(zero.items[1].name == "x");
  CHECK_THROWS_AS(top_features({{0, "nan", std::nan("")}}), InputError);
}

TEST_CASE("chargram_to_word") {
  WordFrequencies f{{"alcista", 10}, {"bajista", 4}};
  CHECK(chargram_to_word("lcis", f) == "alcista");
  CHECK(chargram_to_word("ista", f) == "alcista");
  CHECK(chargram_to_word("baj", f) == "bajista");
  CHECK(chargram_to_word("zzz", f) == "zzz");
  WordFrequencies tie{{"subir", 3}, {"bus", 3}};
  CHECK(chargram_to_word("u", tie) == "bus");

  // brute-force oracle over every substring of the vocabulary
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> freq(1, 5);
  WordFrequencies vocab;
  for (const char* w : {"alcista", "bajista", "subir", "bajar", "caida", "soporte", "resistencia", "divergencia",
                        "rebote", "objetivo", "cierre", "ista"})
    vocab[w] = static_cast<std::size_t>(freq(rng));
  std::set<std::string> probes{"qq", "xyz"};
  for (const auto& [w, n] : vocab)
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t len = 1; i + len <= w.size(); ++len) probes.insert(w.substr(i, len));
  for (const auto& g : probes) {
    std::vector<std::pair<std::string, std::size_t>> hits;
    for (const auto& [w, n] : vocab)
      if (w.find(g) != std::string::npos) hits.emplace_back(w, n);
    std::string want = g;
    if (!hits.empty()) {
      std::sort(hits.begin(), hits.end(), [](auto& a, auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
      want = hits.front().first;
    }
    CHECK(chargram_to_word(g, vocab) == want);
  }
}

TEST_CASE("rendering") {
  const std::string tweet = "#SANTANDER Bullish divergence monitoring 4.54 euros at close";
  const std::string expected =
      "The classification of the post \"#SANTANDER Bullish divergence monitoring 4.54 euros at close\" as short-term "
      "rise can be explained by the presence of these terms: ['bullish', 'divergence']. Additionally, the process "
      "considered the following features: ['Pos. num.'].";
  CHECK(render(tweet, Category::Rise, {"bullish", "divergence"}, {"Pos. num."}) == expected);
  CHECK(render(tweet, Category::Rise, {"bullish", "divergence"}, {"Pos. num."}) ==
        render(tweet, Category::Rise, {"bullish", "divergence"}, {"Pos. num."}));
  CHECK(render("cae", Category::Drop, {"bajista"}, {}) ==
        "The classification of the post \"cae\" as short-term drop can be explained by the presence of these terms: "
        "['bajista'].");
  CHECK(render("<terms>", Category::Other, {}, {}).find("post \"<terms>\" as other") != std::string::npos);
  CHECK(python_list({"it's", "a\"b", "c\\d"}) == R"(["it's", 'a"b', 'c\\d'])");
  CHECK(python_list({}) == "[]");

  auto path = std::filesystem::temp_directory_path() / "credscore_template.txt";
  std::ofstream(path) << "La publicación <tweet> es <category>: <terms>.\nRasgos: <features>.\n";
  auto tpl = ExplanationTemplate::load(path.string());
  CHECK(render("x", Category::Drop, {"a"}, {"FRE"}, tpl) == "La publicación x es short-term drop: ['a']. Rasgos: ['FRE'].");
  std::ofstream(path) << "no placeholders\n";
  CHECK_THROWS_AS(ExplanationTemplate::load(path.string()), InputError);
  std::filesystem::remove(path);
}

namespace {

class CountingModel final : public classify::Classifier {
 public:
  CountingModel(std::size_t dim, std::size_t informative) : spec_(classify::ModelSpec::make(classify::Algorithm::MNB)), dim_(dim), informative_(informative) {}
  const classify::ModelSpec& spec() const override { return spec_; }
  std::size_t dimension() const override { return dim_; }
  classify::Prediction predict(const Vector& x) const override {
    ++calls;
    classify::Prediction p;
    double s = x[informative_] > 0 ? 0.9 : 0.2;
    p.scores = {1 - s, s, 0};
    p.label = s > 0.5 ? Category::Rise : Category::Drop;
    return p;
  }
  nlohmann::json parameters() const override { return {}; }
  mutable std::size_t calls = 0;

 private:
  classify::ModelSpec spec_;
  std::size_t dim_, informative_;
};

CleanPost clean(const std::string& text) {
  CleanPost c;
  c.clean_text = text;
  c.stripped_text = text;
  c.tokens = unicode::split_whitespace(text);
  return c;
}

}  // namespace

TEST_CASE("explanations for both stages") {
  std::vector<CleanPost> posts{clean("alcista fuerte"), clean("bajista caida"), clean("alcista rebote"), clean("hola amigo")};
  FeatureSpaceConfig cfg;
  cfg.char_grams = {NgramMode::Char, 3, 3, 0.01, 1.0, std::nullopt};
  cfg.word_grams = {NgramMode::Word, 1, 1, 0.01, 1.0, std::nullopt};
  cfg.char_wb_grams = {NgramMode::CharWb, 4, 4, 0.01, 1.0, std::nullopt};
  FeatureSpace space = fit_feature_space(posts, cfg);
  WordFrequencies freq = word_frequencies({posts[0].tokens, posts[1].tokens, posts[2].tokens, posts[3].tokens});
  const std::size_t lcis = space.block_offset(TextBlock::Char) + *space.vocabulary(TextBlock::Char).column("lci");
  CountingModel model(space.dimension(), lcis);

  classify::HybridResult lex;
  lex.category = Category::Drop;
  lex.source = classify::Source::Lexicon;
  lex.matched_terms = {"bajista"};
  auto e = explain_result("p1", "Muy bajista", lex, &model, space, freq, {});
  CHECK(model.calls == 0);
  CHECK(e.terms == Strings{"bajista"});
  CHECK(e.features.empty());
  CHECK(e.text == render("Muy bajista", Category::Drop, {"bajista"}, {}));

  Vector x = space.dense(build_feature_vector("alcista fuerte", posts[0], space));
  classify::HybridResult ml;
  ml.source = classify::Source::Model;
  ml.features = x;
  ml.prediction = model.predict(x);
  ml.category = ml.prediction->label;
  ExplainOptions opt;
  opt.samples = 300;
  opt.seed = 5;
  auto m = explain_result("p2", "alcista fuerte", ml, &model, space, freq, opt);
  CHECK(model.calls > 300);
  REQUIRE_FALSE(m.terms.empty());
  CHECK(m.terms.front() == "alcista");  // the informative char gram maps back to its word
  CHECK(m.attributions.size() == static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](double v) { return v != 0; })));
  auto j = m.to_json();
  CHECK(j["source"] == "ml");
  CHECK(j["category"] == "rise");
  auto m2 = explain_result("p2", "alcista fuerte", ml, &model, space, freq, opt);
  CHECK(m2.text == m.text);
}
