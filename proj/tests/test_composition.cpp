// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wac/composition.hpp"
#include "wac/datagen.hpp"
#include "wac/error.hpp"

namespace wac {
namespace {

// 1-D classifier whose probability at x = 1 is p.
WordClassifier at_one(const std::string& word, double p) {
  WordClassifier c;
  c.word = word;
  c.weights = {std::log(p / (1.0 - p))};
  return c;
}

Scene scene_of(std::vector<FeatureVector> xs) {
  Scene s;
  s.id = "s";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s.objects.push_back({"o" + std::to_string(i), std::move(xs[i]), {}});
  }
  return s;
}

Lexicon random_lexicon(std::size_t dim, std::size_t words, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  Lexicon lex(dim);
  for (std::size_t k = 0; k < words; ++k) {
    WordClassifier c;
    c.word = "w" + std::to_string(k);
    c.weights.resize(dim);
    for (auto& w : c.weights) w = g(rng);
    c.bias = g(rng);
    lex.insert(std::move(c));
  }
  return lex;
}

Scene random_scene(std::size_t dim, std::size_t objects, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<FeatureVector> xs(objects, FeatureVector(dim));
  for (auto& x : xs) for (auto& v : x) v = u(rng);
  return scene_of(std::move(xs));
}

std::vector<std::string> random_tokens(std::size_t words, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, words + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = pick(rng);
    out.push_back(k < words ? "w" + std::to_string(k) : "zzz" + std::to_string(k));
  }
  return out;
}

TEST(ScorePhrase, EmptyPhraseIsOne) {
  Lexicon lex(2);
  EXPECT_EQ(score_phrase(lex, {}, std::vector<double>{0.4, -3.0}), 1.0);
}

TEST(ScorePhrase, ProductOfWordProbabilities) {
  Lexicon lex(1);
  lex.insert(at_one("a", 0.8));
  lex.insert(at_one("b", 0.5));
  const std::vector<std::string> tokens{"a", "b"};
  EXPECT_NEAR(score_phrase(lex, tokens, std::vector<double>{1.0}), 0.4, 1e-15);
}

TEST(ScorePhrase, UnknownWordIsNeutralHalf) {
  Lexicon lex(1);
  lex.insert(at_one("a", 0.8));
  const std::vector<std::string> tokens{"a", "blicket"};
  EXPECT_NEAR(score_phrase(lex, tokens, std::vector<double>{1.0}), 0.4, 1e-15);
}

TEST(ScorePhrase, DimensionMismatch) {
  Lexicon lex(2);
  EXPECT_THROW(score_phrase(lex, {}, std::vector<double>{1.0}), Error);
}

TEST(ScorePhrase, ClampKeepsLongPhrasesPositive) {
  WordClassifier c;
  c.word = "never";
  c.weights = {-1e4};
  Lexicon lex(1);
  lex.insert(c);
  const std::vector<std::string> tokens(10, "never");
  const double s = score_phrase(lex, tokens, std::vector<double>{1.0});
  EXPECT_GE(s, 0.0);
  const auto scene = scene_of({FeatureVector{1.0}});
  ResolutionState st(scene);
  for (const auto& t : tokens) st.feed(lex, t);
  EXPECT_TRUE(std::isfinite(st.log_scores()[0]));
  EXPECT_NEAR(st.log_scores()[0], 10.0 * std::log(1e-12), 1e-9);
}

TEST(ScorePhrase, RedSquareBeatsBlueCircle) {
  auto spec = GenerativeSpec::color_shape(3);
  spec.noise_sigma = 0.0;
  GenerateOptions opt;
  opt.n_scenes = 300;
  const auto data = generate(spec, opt);
  Lexicon lex(data.dim);
  for (const auto& ts : build_training_sets(data, 3.0, 5)) lex.train_word(ts.word, ts.pos, ts.neg);

  std::mt19937_64 rng(1);
  ObjectTruth red_square = sample_truth(spec, rng);
  ObjectTruth blue_circle = red_square;
  red_square.values = {0, 0};   // red, square
  blue_circle.values = {2, 1};  // blue, circle
  const auto xr = render_features(spec, red_square, rng);
  const auto xb = render_features(spec, blue_circle, rng);
  const std::vector<std::string> tokens{"red", "square"};
  EXPECT_GT(score_phrase(lex, tokens, xr), score_phrase(lex, tokens, xb));
}

TEST(Resolve, SingleWordNormalizes) {
  Lexicon lex(1);
  lex.insert(at_one("a", 0.8));
  // p at x = 1 is 0.8; at x = -1 it is 0.2.
  const auto scene = scene_of({{1.0}, {-1.0}});
  const std::vector<std::string> tokens{"a"};
  const auto d = resolve(lex, tokens, scene);
  EXPECT_NEAR(d.probs[0], 0.8, 1e-15);
  EXPECT_NEAR(d.probs[1], 0.2, 1e-15);
  EXPECT_EQ(d.object_ids, (std::vector<std::string>{"o0", "o1"}));
  EXPECT_EQ(d.prob_of("o1"), d.probs[1]);
}

TEST(Resolve, EmptyPhraseIsUniform) {
  Lexicon lex(2);
  std::mt19937_64 rng(4);
  const auto scene = random_scene(2, 5, rng);
  const auto d = resolve(lex, {}, scene);
  for (double p : d.probs) EXPECT_EQ(p, 0.2);
  EXPECT_EQ(d.argmax(), 0u);
}

TEST(Resolve, AllScoresClampedGivesUniform) {
  WordClassifier c;
  c.word = "never";
  c.weights = {-1e5};
  Lexicon lex(1);
  lex.insert(c);
  const std::vector<std::string> tokens{"never", "never"};
  const auto d = resolve(lex, tokens, scene_of({{1.0}, {2.0}, {3.0}}));
  for (double p : d.probs) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Resolve, EmptySceneAndBadDimension) {
  Lexicon lex(2);
  Scene empty;
  EXPECT_THROW(resolve(lex, {}, empty), Error);
  EXPECT_THROW(resolve(lex, {}, scene_of({FeatureVector{1.0}})), Error);
}

TEST(ResolutionState, NoTokensIsUniform) {
  std::mt19937_64 rng(8);
  const auto scene = random_scene(3, 4, rng);
  ResolutionState st(scene);
  EXPECT_EQ(st.tokens_consumed(), 0u);
  for (double p : st.distribution().probs) EXPECT_EQ(p, 0.25);
}

TEST(ResolutionState, UnknownTokenLeavesDistributionExactlyUnchanged) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto lex = random_lexicon(3, 4, rng);
    const auto scene = random_scene(3, 5, rng);
    ResolutionState st(scene);
    for (const auto& t : random_tokens(4, 3, rng)) st.feed(lex, t);
    const auto before = st.distribution();
    st.feed(lex, "unheard-of");
    EXPECT_EQ(st.distribution(), before);
    EXPECT_EQ(st.tokens_consumed(), 4u);
  }
}

TEST(ResolutionState, IncrementalEqualsBatch) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> len(0, 6), objs(1, 7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto lex = random_lexicon(4, 6, rng);
    const auto scene = random_scene(4, objs(rng), rng);
    const auto tokens = random_tokens(6, len(rng), rng);
    ResolutionState st(scene);
    for (const auto& t : tokens) st.feed(lex, t);
    const auto inc = st.distribution();
    const auto batch = resolve(lex, tokens, scene);
    for (std::size_t i = 0; i < inc.size(); ++i) {
      worst = std::max(worst, std::abs(inc.probs[i] - batch.probs[i]));
    }
    EXPECT_EQ(st.tokens_consumed(), tokens.size());
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Resolve, DistributionIsNormalized) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const auto lex = random_lexicon(3, 5, rng);
    const auto scene = random_scene(3, 1 + trial % 8, rng);
    const auto d = resolve(lex, random_tokens(5, trial % 12, rng), scene);
    double sum = 0.0;
    for (double p : d.probs) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Resolve, ScalingRawScoresLeavesDistribution) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> c(-20.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto lex = random_lexicon(3, 5, rng);
    const auto scene = random_scene(3, 6, rng);
    ResolutionState st(scene);
    for (const auto& t : random_tokens(5, 3, rng)) st.feed(lex, t);
    auto logs = st.log_scores();
    const double shift = c(rng);  // log of a positive constant
    std::vector<double> shifted(logs);
    for (auto& v : shifted) v += shift;
    const auto a = normalize_log_scores(scene, logs);
    const auto b = normalize_log_scores(scene, shifted);
    EXPECT_EQ(a.argmax(), b.argmax());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.probs[i], b.probs[i], 1e-12);
  }
}

// An object on which the new word scores strictly lowest cannot gain
// relative score from that word.
TEST(Resolve, MonotoneComposition) {
  std::mt19937_64 rng(51);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto lex = random_lexicon(3, 5, rng);
    const auto scene = random_scene(3, 5, rng);
    auto tokens = random_tokens(5, 2, rng);
    const std::string w = "w" + std::to_string(trial % 5);
    std::vector<double> pw;
    for (const auto& o : scene.objects) pw.push_back(fit_probability(lex.at(w), o.features));
    const auto low = static_cast<std::size_t>(std::min_element(pw.begin(), pw.end()) - pw.begin());
    bool strict = true;
    for (std::size_t i = 0; i < pw.size(); ++i) strict &= i == low || pw[i] > pw[low];
    if (!strict) continue;
    const double before = resolve(lex, tokens, scene).probs[low];
    tokens.push_back(w);
    const double after = resolve(lex, tokens, scene).probs[low];
    EXPECT_LE(after, before * (1.0 + 1e-12));
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(GoldRank, TiesFollowSceneOrder) {
  ReferentDistribution d{{"a", "b", "c", "d"}, {0.3, 0.3, 0.1, 0.3}};
  EXPECT_EQ(d.argmax(), 0u);
  EXPECT_EQ(gold_rank(d, 0), 1u);
  EXPECT_EQ(gold_rank(d, 1), 2u);
  EXPECT_EQ(gold_rank(d, 3), 3u);
  EXPECT_EQ(gold_rank(d, 2), 4u);
}

TEST(Evaluate, SingleCorrectEpisode) {
  Lexicon lex(1);
  lex.insert(at_one("a", 0.8));
  std::vector<Scene> scenes{scene_of({{1.0}, {-1.0}})};
  std::vector<Episode> eps{{{"a"}, "s", "o0"}};
  const auto m = evaluate(lex, eps, scenes);
  EXPECT_EQ(m.accuracy_at_1, 1.0);
  EXPECT_EQ(m.mrr, 1.0);
  EXPECT_EQ(m.mean_gold_rank, 1.0);
  EXPECT_EQ(m.episodes, 1u);
}

TEST(Evaluate, GoldAlwaysSecondOfFour) {
  Lexicon lex(1);
  WordClassifier c;
  c.word = "big";
  c.weights = {1.0};
  lex.insert(c);
  std::vector<Scene> scenes{scene_of({{3.0}, {2.0}, {1.0}, {0.0}})};
  std::vector<Episode> eps(7, Episode{{"big"}, "s", "o1"});
  const auto m = evaluate(lex, eps, scenes);
  EXPECT_EQ(m.accuracy_at_1, 0.0);
  EXPECT_DOUBLE_EQ(m.mrr, 0.5);
  EXPECT_DOUBLE_EQ(m.mean_gold_rank, 2.0);
}

TEST(Evaluate, UntrainedLexiconIsAtChance) {
  auto spec = GenerativeSpec::color_shape(77);
  GenerateOptions opt;
  opt.n_scenes = 1000;
  opt.objects_per_scene = 4;
  const auto data = generate(spec, opt);
  Lexicon empty(data.dim);
  const auto m = evaluate(empty, data.episodes, data.scenes);
  EXPECT_EQ(m.episodes, 1000u);
  // Uniform ties resolve to the first object, so hits come from gold
  // positions only.
  EXPECT_NEAR(m.accuracy_at_1, 0.25, 0.05);
}

TEST(Evaluate, MissingGoldNamesEpisode) {
  Lexicon lex(1);
  std::vector<Scene> scenes{scene_of({FeatureVector{1.0}})};
  std::vector<Episode> eps{{{"a"}, "s", "o0"}, {{"a"}, "s", "nope"}};
  try {
    evaluate(lex, eps, scenes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFound);
    EXPECT_NE(std::string(e.what()).find("episode 1"), std::string::npos);
  }
  std::vector<Episode> bad_scene{{{"a"}, "elsewhere", "o0"}};
  EXPECT_THROW(evaluate(lex, bad_scene, scenes), Error);
}

TEST(Evaluate, EmptyEpisodeListGivesZeroCount) {
  Lexicon lex(1);
  const auto m = evaluate(lex, {}, {});
  EXPECT_EQ(m.episodes, 0u);
}

}  // namespace
}  // namespace wac
