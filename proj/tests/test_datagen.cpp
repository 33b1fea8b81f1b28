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

#include <cmath>
#include <set>
#include <sstream>

#include "wac/datagen.hpp"
#include "wac/error.hpp"
#include "wac/io.hpp"

namespace wac {
namespace {

std::string attribute(const SceneObject& o, std::string_view key) {
  for (const auto& [k, v] : o.attributes) {
    if (k == key) return v;
  }
  return {};
}

const SceneObject& gold_of(const Dataset& d, const Episode& ep) {
  for (const auto& s : d.scenes) {
    if (s.id == ep.scene_id) return s.objects.at(s.index_of(ep.gold_id));
  }
  throw std::runtime_error("scene missing");
}

TEST(Spec, PresetWidths) {
  EXPECT_EQ(GenerativeSpec::left_right().dim(), 2u);
  EXPECT_EQ(GenerativeSpec::color_shape().dim(), 16u);
  EXPECT_EQ(GenerativeSpec::fast_mapping().dim(), 16u);
  EXPECT_EQ(GenerativeSpec::color_shape().position_offset(), 14u);
  EXPECT_EQ(GenerativeSpec::preset("left-right", 3).seed, 3u);
  EXPECT_THROW(GenerativeSpec::preset("plaid", 3), Error);
}

TEST(Spec, InconsistentWidthsRejected) {
  auto spec = GenerativeSpec::color_shape();
  spec.declared_dim = 15;
  try {
    spec.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
  EXPECT_THROW(generate(spec, {}), Error);
  spec.declared_dim = 16;
  EXPECT_NO_THROW(spec.validate());
}

TEST(Spec, InvalidSettingsRejected) {
  auto spec = GenerativeSpec::color_shape();
  spec.noise_sigma = 0.5;
  EXPECT_THROW(spec.validate(), Error);
  spec.noise_sigma = -0.1;
  EXPECT_THROW(spec.validate(), Error);
  spec = GenerativeSpec::color_shape();
  spec.groups[1].values.push_back("red");  // a word naming two blocks
  EXPECT_THROW(spec.validate(), Error);
  GenerateOptions opt;
  opt.objects_per_scene = 1;
  EXPECT_THROW(generate(GenerativeSpec::color_shape(), opt), Error);
}

TEST(Generate, DeterministicAndByteIdentical) {
  GenerateOptions opt;
  opt.n_scenes = 50;
  const auto a = generate(GenerativeSpec::color_shape(42), opt);
  const auto b = generate(GenerativeSpec::color_shape(42), opt);
  EXPECT_EQ(a, b);
  std::ostringstream sa, ea, sb, eb;
  io::save_dataset(sa, ea, a);
  io::save_dataset(sb, eb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(ea.str(), eb.str());
  const auto c = generate(GenerativeSpec::color_shape(43), opt);
  EXPECT_NE(a, c);
}

TEST(Generate, ShapeAndIntegrity) {
  GenerateOptions opt;
  opt.n_scenes = 40;
  opt.objects_per_scene = 5;
  const auto d = generate(GenerativeSpec::color_shape(1), opt);
  EXPECT_EQ(d.scenes.size(), 40u);
  EXPECT_EQ(d.episodes.size(), 40u);
  for (const auto& s : d.scenes) EXPECT_EQ(s.objects.size(), 5u);
  for (const auto& ep : d.episodes) EXPECT_EQ(ep.tokens.size(), 2u);
  EXPECT_NO_THROW(d.validate());
  std::set<std::string> used;
  for (const auto& ep : d.episodes) used.insert(ep.tokens.begin(), ep.tokens.end());
  EXPECT_EQ(d.vocab(), used);

  opt.episodes_per_scene = 0;
  const auto all = generate(GenerativeSpec::color_shape(1), opt);
  EXPECT_EQ(all.episodes.size(), 200u);
}

TEST(Generate, LabelFidelityWithoutNoise) {
  for (const auto* name : {"color-shape", "left-right"}) {
    auto spec = GenerativeSpec::preset(name, 9);
    spec.noise_sigma = 0.0;
    GenerateOptions opt;
    opt.n_scenes = 200;
    opt.episodes_per_scene = 0;
    opt.tokens_per_expression = spec.side_words ? 1 : 2;
    const auto d = generate(spec, opt);
    for (const auto& ep : d.episodes) {
      const auto& gold = gold_of(d, ep);
      std::set<std::string> truths;
      for (const auto& [k, v] : gold.attributes) truths.insert(v);
      for (const auto& tok : ep.tokens) EXPECT_TRUE(truths.count(tok)) << name << " " << tok;
    }
    // Noise-free features are exact one-hot blocks.
    for (const auto& s : d.scenes) {
      for (const auto& o : s.objects) {
        for (std::size_t j = 0; j < spec.position_offset(); ++j) {
          EXPECT_TRUE(o.features[j] == 0.0 || o.features[j] == 1.0);
        }
      }
    }
  }
}

TEST(Generate, ExpressionsPreferDiscriminatingWords) {
  auto spec = GenerativeSpec::color_shape(5);
  GenerateOptions opt;
  opt.n_scenes = 200;
  opt.tokens_per_expression = 1;
  opt.episodes_per_scene = 0;
  const auto d = generate(spec, opt);
  for (const auto& ep : d.episodes) {
    const auto& scene = *index_scenes(d.scenes).at(ep.scene_id);
    const auto& gold = scene.objects[scene.index_of(ep.gold_id)];
    const std::string color = attribute(gold, "color"), shape = attribute(gold, "shape");
    auto count = [&](std::string_view key, const std::string& v) {
      std::size_t n = 0;
      for (const auto& o : scene.objects) n += attribute(o, key) == v;
      return n;
    };
    const auto chosen = ep.tokens[0] == color ? count("color", color) : count("shape", shape);
    EXPECT_LE(chosen, std::min(count("color", color), count("shape", shape)));
  }
}

TEST(Generate, LeftRightGoldSide) {
  const auto spec = GenerativeSpec::left_right(7);
  GenerateOptions opt;
  opt.n_scenes = 500;
  opt.objects_per_scene = 2;
  opt.tokens_per_expression = 1;
  opt.episodes_per_scene = 0;
  const auto d = generate(spec, opt);
  ASSERT_EQ(d.episodes.size(), 1000u);
  std::size_t rights = 0;
  for (const auto& ep : d.episodes) {
    const double x = std::stod(attribute(gold_of(d, ep), "x"));
    if (ep.tokens[0] == "right") {
      EXPECT_GT(x, 0.0);
      ++rights;
    } else {
      EXPECT_EQ(ep.tokens[0], "left");
      EXPECT_LT(x, 0.0);
    }
    EXPECT_GE(std::abs(x), spec.side_margin);
  }
  EXPECT_GT(rights, 400u);
  EXPECT_LT(rights, 600u);
}

TEST(Negatives, CountsFollowCeiling) {
  EXPECT_EQ(negative_count(3.0, 100), 300u);
  EXPECT_EQ(negative_count(0.01, 100), 1u);
  EXPECT_EQ(negative_count(0.5, 3), 2u);
  EXPECT_EQ(negative_count(0.1, 30), 3u);  // 0.1 * 30 is 3.0000000000000004
  EXPECT_EQ(negative_count(3.0, 0), 0u);
  EXPECT_THROW(negative_count(-1.0, 3), Error);
}

TEST(Negatives, HundredPositivesGiveThreeHundred) {
  GenerateOptions opt;
  opt.n_scenes = 400;
  const auto d = generate(GenerativeSpec::color_shape(2), opt);
  const auto s = sample_negatives(d, "red", 3.0, 100, 11);
  EXPECT_EQ(s.features.size(), 300u);
  EXPECT_EQ(s.object_ids.size(), 300u);
  EXPECT_EQ(std::set<std::string>(s.object_ids.begin(), s.object_ids.end()).size(), 300u);
  EXPECT_EQ(sample_negatives(d, "red", 0.01, 100, 11).features.size(), 1u);
}

TEST(Negatives, PurityExhaustive) {
  GenerateOptions opt;
  opt.n_scenes = 30;
  opt.objects_per_scene = 3;
  const auto d = generate(GenerativeSpec::color_shape(3), opt);
  for (const auto& word : d.vocab()) {
    std::set<std::string> referred;
    for (const auto& ep : d.episodes) {
      if (std::find(ep.tokens.begin(), ep.tokens.end(), word) != ep.tokens.end()) {
        referred.insert(ep.gold_id);
      }
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto s = sample_negatives(d, word, 3.0, seed);
      for (const auto& id : s.object_ids) EXPECT_FALSE(referred.count(id)) << word;
      EXPECT_LE(s.object_ids.size(), negative_count(3.0, referred.size() * 10));
    }
  }
}

TEST(Negatives, DeterministicUnderSeed) {
  GenerateOptions opt;
  opt.n_scenes = 100;
  const auto d = generate(GenerativeSpec::color_shape(4), opt);
  const auto a = sample_negatives(d, "blue", 3.0, 99);
  const auto b = sample_negatives(d, "blue", 3.0, 99);
  EXPECT_EQ(a.object_ids, b.object_ids);
  EXPECT_EQ(a.features, b.features);
  const auto sets1 = build_training_sets(d, 3.0, 5);
  const auto sets2 = build_training_sets(d, 3.0, 5);
  ASSERT_EQ(sets1.size(), d.vocab().size());
  for (std::size_t i = 0; i < sets1.size(); ++i) {
    EXPECT_EQ(sets1[i].word, sets2[i].word);
    EXPECT_EQ(sets1[i].neg, sets2[i].neg);
    EXPECT_EQ(sets1[i].pos, positives_for(d, sets1[i].word));
  }
}

TEST(Negatives, SmallPoolReturnedWhole) {
  GenerateOptions opt;
  opt.n_scenes = 2;
  opt.objects_per_scene = 2;
  const auto d = generate(GenerativeSpec::color_shape(6), opt);
  const auto word = d.episodes[0].tokens[0];
  const auto s = sample_negatives(d, word, 50.0, 12);
  EXPECT_GE(s.object_ids.size(), 1u);
  EXPECT_LE(s.object_ids.size(), 3u);
  EXPECT_EQ(std::set<std::string>(s.object_ids.begin(), s.object_ids.end()).size(),
            s.object_ids.size());
}

TEST(Negatives, NoEligibleObjectsIsAnError) {
  Dataset d;
  d.dim = 1;
  d.scenes.push_back({"s", {{"a", {1.0}, {}}, {"b", {2.0}, {}}}});
  d.episodes = {{{"it"}, "s", "a"}, {{"it"}, "s", "b"}};
  EXPECT_THROW(sample_negatives(d, "it", 1.0, 1), Error);
}

TEST(Jitter, FramesAreSeededNoise) {
  const std::vector<double> x{1.0, 0.0, -0.5};
  const auto a = jitter_frames(x, 10, 0.1, 3);
  EXPECT_EQ(a.size(), 10u);
  EXPECT_EQ(a, jitter_frames(x, 10, 0.1, 3));
  EXPECT_NE(a, jitter_frames(x, 10, 0.1, 4));
  const auto same = jitter_frames(x, 3, 0.0, 3);
  for (const auto& f : same) EXPECT_EQ(f, x);
}

TEST(Seeds, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(FastMapping, TrialHasExactlyOneTarget) {
  const auto spec = GenerativeSpec::fast_mapping(1);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto trial = make_fast_mapping_trial(spec, t);
    const auto& teach = trial.teach_scene;
    const auto& gold = teach.objects.at(teach.index_of(trial.gold_id));
    const auto kind = std::make_pair(attribute(gold, "color"), attribute(gold, "shape"));
    std::size_t matches = 0;
    for (const auto& o : trial.test_scene.objects) {
      if (std::make_pair(attribute(o, "color"), attribute(o, "shape")) == kind) {
        ++matches;
        EXPECT_EQ(o.id, trial.target_id);
      }
    }
    EXPECT_EQ(matches, 1u);
    EXPECT_EQ(trial.word, "wug");
  }
}

}  // namespace
}  // namespace wac
