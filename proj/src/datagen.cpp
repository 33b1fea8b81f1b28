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

#include "wac/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "wac/error.hpp"
#include "wac/text_format.hpp"

namespace wac {

std::size_t GenerativeSpec::position_offset() const {
  std::size_t width = 0;
  for (const auto& g : groups) width += g.values.size();
  return width;
}

std::size_t GenerativeSpec::dim() const {
  return position_offset() + (position ? 2 : 0);
}

void GenerativeSpec::validate() const {
  std::unordered_set<std::string> words;
  for (const auto& g : groups) {
    if (g.values.empty()) {
      fail(ErrorKind::InvalidArgument, "attribute group '" + g.name + "' has no values");
    }
    for (const auto& v : g.values) {
      if (v.empty() || !words.insert(v).second) {
        fail(ErrorKind::InvalidArgument,
             "attribute value '" + v + "' is empty or used by two feature blocks");
      }
    }
  }
  if (side_words) {
    if (!position) fail(ErrorKind::InvalidArgument, "side words require the position block");
    if (words.count(std::string(kLeftWord)) || words.count(std::string(kRightWord))) {
      fail(ErrorKind::InvalidArgument, "side words collide with attribute values");
    }
    if (!(side_margin >= 0.0 && side_margin < 1.0)) {
      fail(ErrorKind::InvalidArgument, "side_margin must be in [0, 1)");
    }
  }
  if (!(noise_sigma >= 0.0 && noise_sigma < 0.5)) {
    fail(ErrorKind::InvalidArgument, "noise_sigma must be in [0, 0.5)");
  }
  if (dim() == 0) fail(ErrorKind::InvalidArgument, "spec has zero feature width");
  if (declared_dim && *declared_dim != dim()) {
    fail(ErrorKind::Dimension, "spec declares dimension " + std::to_string(*declared_dim) +
                                   " but its blocks are " + std::to_string(dim()) + " wide");
  }
}

std::vector<std::string> GenerativeSpec::vocabulary() const {
  std::vector<std::string> words;
  for (const auto& g : groups) words.insert(words.end(), g.values.begin(), g.values.end());
  if (side_words) {
    words.emplace_back(kLeftWord);
    words.emplace_back(kRightWord);
  }
  return words;
}

GenerativeSpec GenerativeSpec::left_right(std::uint64_t seed) {
  GenerativeSpec spec;
  spec.name = "left-right";
  spec.position = true;
  spec.side_words = true;
  spec.noise_sigma = 0.05;
  spec.seed = seed;
  return spec;
}

GenerativeSpec GenerativeSpec::color_shape(std::uint64_t seed) {
  GenerativeSpec spec;
  spec.name = "color-shape";
  spec.groups = {
      {"color", {"red", "green", "blue", "yellow", "purple", "orange", "white", "black"}},
      {"shape", {"square", "circle", "triangle", "star", "diamond", "cross"}},
  };
  spec.position = true;
  spec.noise_sigma = 0.05;
  spec.seed = seed;
  return spec;
}

GenerativeSpec GenerativeSpec::fast_mapping(std::uint64_t seed) {
  GenerativeSpec spec = color_shape(seed);
  spec.name = "fast-mapping";
  spec.noise_sigma = 0.1;
  return spec;
}

GenerativeSpec GenerativeSpec::preset(std::string_view name, std::uint64_t seed) {
  if (name == "left-right") return left_right(seed);
  if (name == "color-shape") return color_shape(seed);
  if (name == "fast-mapping") return fast_mapping(seed);
  fail(ErrorKind::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

std::set<std::string> Dataset::vocab() const {
  std::set<std::string> words;
  for (const auto& ep : episodes) words.insert(ep.tokens.begin(), ep.tokens.end());
  return words;
}

void Dataset::validate() const {
  if (dim == 0) fail(ErrorKind::InvalidArgument, "dataset dimension is 0");
  for (const auto& s : scenes) s.validate(dim);
  const auto index = index_scenes(scenes);
  for (std::size_t e = 0; e < episodes.size(); ++e) locate_episode(index, episodes[e], e);
}

ObjectTruth sample_truth(const GenerativeSpec& spec, std::mt19937_64& rng) {
  ObjectTruth t;
  for (const auto& g : spec.groups) {
    std::uniform_int_distribution<std::size_t> pick(0, g.values.size() - 1);
    t.values.push_back(pick(rng));
  }
  if (spec.position) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    if (spec.side_words) {
      std::uniform_real_distribution<double> mag(spec.side_margin, 1.0);
      std::bernoulli_distribution right(0.5);
      const bool is_right = right(rng);
      t.x = is_right ? mag(rng) : -mag(rng);
    } else {
      t.x = unit(rng);
    }
    t.y = unit(rng);
  }
  return t;
}

FeatureVector render_features(const GenerativeSpec& spec, const ObjectTruth& truth,
                              std::mt19937_64& rng) {
  FeatureVector x(spec.dim(), 0.0);
  std::size_t offset = 0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    x[offset + truth.values[g]] = 1.0;
    offset += spec.groups[g].values.size();
  }
  if (spec.position) {
    x[offset] = truth.x;
    x[offset + 1] = truth.y;
  }
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (auto& v : x) v += noise(rng);
  }
  return x;
}

std::vector<std::string> true_words(const GenerativeSpec& spec, const ObjectTruth& truth) {
  std::vector<std::string> words;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    words.push_back(spec.groups[g].values[truth.values[g]]);
  }
  if (spec.side_words) words.emplace_back(truth.x > 0.0 ? kRightWord : kLeftWord);
  return words;
}

SceneObject make_object(const GenerativeSpec& spec, const ObjectTruth& truth,
                        std::string id, std::mt19937_64& rng) {
  SceneObject obj;
  obj.id = std::move(id);
  obj.features = render_features(spec, truth, rng);
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    obj.attributes.emplace_back(spec.groups[g].name, spec.groups[g].values[truth.values[g]]);
  }
  if (spec.position) {
    obj.attributes.emplace_back("x", text::format_double(truth.x));
    obj.attributes.emplace_back("y", text::format_double(truth.y));
  }
  if (spec.side_words) {
    obj.attributes.emplace_back("side", truth.x > 0.0 ? "right" : "left");
  }
  std::sort(obj.attributes.begin(), obj.attributes.end());
  return obj;
}

namespace {

struct GeneratedScene {
  Scene scene;
  std::vector<ObjectTruth> truths;
};

GeneratedScene generate_scene_with_truth(const GenerativeSpec& spec, std::string scene_id,
                                         std::size_t n_objects, std::mt19937_64& rng) {
  GeneratedScene out;
  out.scene.id = std::move(scene_id);
  for (std::size_t j = 0; j < n_objects; ++j) {
    out.truths.push_back(sample_truth(spec, rng));
    out.scene.objects.push_back(make_object(spec, out.truths.back(),
                                            out.scene.id + "o" + std::to_string(j), rng));
  }
  return out;
}

std::vector<std::string> describe(const GenerativeSpec& spec,
                                  const std::vector<ObjectTruth>& truths,
                                  std::size_t gold, std::size_t n_tokens,
                                  std::mt19937_64& rng) {
  const auto gold_words = true_words(spec, truths[gold]);
  std::vector<std::size_t> sharing(gold_words.size(), 0);
  for (std::size_t j = 0; j < truths.size(); ++j) {
    if (j == gold) continue;
    const auto other = true_words(spec, truths[j]);
    for (std::size_t k = 0; k < gold_words.size(); ++k) {
      if (other[k] == gold_words[k]) ++sharing[k];
    }
  }
  std::vector<std::size_t> slots(gold_words.size());
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  std::stable_sort(slots.begin(), slots.end(),
                   [&](std::size_t a, std::size_t b) { return sharing[a] < sharing[b]; });
  slots.resize(n_tokens);
  std::sort(slots.begin(), slots.end());
  std::vector<std::string> tokens;
  for (std::size_t k : slots) tokens.push_back(gold_words[k]);
  return tokens;
}

}  // namespace

Scene generate_scene(const GenerativeSpec& spec, std::string scene_id,
                     std::size_t n_objects, std::mt19937_64& rng) {
  spec.validate();
  if (n_objects == 0) fail(ErrorKind::InvalidArgument, "scene needs at least one object");
  return generate_scene_with_truth(spec, std::move(scene_id), n_objects, rng).scene;
}

Dataset generate(const GenerativeSpec& spec, const GenerateOptions& options) {
  spec.validate();
  if (options.objects_per_scene < 2) {
    fail(ErrorKind::InvalidArgument, "objects_per_scene must be >= 2");
  }
  const std::size_t words_per_object = spec.groups.size() + (spec.side_words ? 1 : 0);
  if (options.tokens_per_expression == 0 || options.tokens_per_expression > words_per_object) {
    fail(ErrorKind::InvalidArgument,
         "tokens_per_expression must be in [1, " + std::to_string(words_per_object) + "]");
  }
  if (options.episodes_per_scene > options.objects_per_scene) {
    fail(ErrorKind::InvalidArgument, "episodes_per_scene exceeds objects_per_scene");
  }

  std::mt19937_64 rng(spec.seed);
  Dataset data;
  data.dim = spec.dim();
  for (std::size_t s = 0; s < options.n_scenes; ++s) {
    auto gen = generate_scene_with_truth(spec, "s" + std::to_string(s),
                                         options.objects_per_scene, rng);
    std::vector<std::size_t> golds(options.objects_per_scene);
    std::iota(golds.begin(), golds.end(), 0);
    if (options.episodes_per_scene > 0) {
      std::shuffle(golds.begin(), golds.end(), rng);
      golds.resize(options.episodes_per_scene);
    }
    for (std::size_t gold : golds) {
      Episode ep;
      ep.tokens = describe(spec, gen.truths, gold, options.tokens_per_expression, rng);
      ep.scene_id = gen.scene.id;
      ep.gold_id = gen.scene.objects[gold].id;
      data.episodes.push_back(std::move(ep));
    }
    data.scenes.push_back(std::move(gen.scene));
  }
  return data;
}

std::vector<FeatureVector> positives_for(const Dataset& data, std::string_view word) {
  const auto index = index_scenes(data.scenes);
  std::vector<FeatureVector> out;
  for (std::size_t e = 0; e < data.episodes.size(); ++e) {
    const auto& ep = data.episodes[e];
    if (std::find(ep.tokens.begin(), ep.tokens.end(), word) == ep.tokens.end()) continue;
    auto [scene, gold] = locate_episode(index, ep, e);
    out.push_back(scene->objects[gold].features);
  }
  return out;
}

std::size_t negative_count(double ratio, std::size_t positive_count) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    fail(ErrorKind::InvalidArgument, "negative ratio must be > 0");
  }
  // Tolerance absorbs representation error such as 0.01 * 100.
  const double raw = ratio * static_cast<double>(positive_count);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

NegativeSample sample_negatives(const Dataset& data, std::string_view word,
                                double ratio, std::size_t positive_count,
                                std::uint64_t seed) {
  const std::size_t count = negative_count(ratio, positive_count);
  std::unordered_set<std::string> referred;
  for (const auto& ep : data.episodes) {
    if (std::find(ep.tokens.begin(), ep.tokens.end(), word) != ep.tokens.end()) {
      referred.insert(ep.scene_id + '\x1f' + ep.gold_id);
    }
  }
  std::vector<const SceneObject*> pool;
  for (const auto& s : data.scenes) {
    for (const auto& obj : s.objects) {
      if (!referred.count(s.id + '\x1f' + obj.id)) pool.push_back(&obj);
    }
  }
  if (pool.empty()) {
    fail(ErrorKind::InvalidArgument,
         "no eligible negatives for '" + std::string(word) + "'");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(pool.size(), count));
  NegativeSample out;
  for (const auto* obj : pool) {
    out.object_ids.push_back(obj->id);
    out.features.push_back(obj->features);
  }
  return out;
}

NegativeSample sample_negatives(const Dataset& data, std::string_view word,
                                double ratio, std::uint64_t seed) {
  return sample_negatives(data, word, ratio, positives_for(data, word).size(), seed);
}

std::vector<TrainingSet> build_training_sets(const Dataset& data, double neg_ratio,
                                             std::uint64_t seed) {
  std::vector<TrainingSet> sets;
  std::uint64_t stream = 0;
  for (const auto& word : data.vocab()) {
    TrainingSet set;
    set.word = word;
    set.pos = positives_for(data, word);
    set.neg = sample_negatives(data, word, neg_ratio, set.pos.size(),
                               derive_seed(seed, stream++)).features;
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<FeatureVector> jitter_frames(std::span<const double> features,
                                         std::size_t n_frames, double sigma,
                                         std::uint64_t seed) {
  if (!(sigma >= 0.0)) fail(ErrorKind::InvalidArgument, "jitter sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::vector<FeatureVector> frames;
  frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    FeatureVector x(features.begin(), features.end());
    if (sigma > 0.0) {
      for (auto& v : x) v += noise(rng);
    }
    frames.push_back(std::move(x));
  }
  return frames;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> attribute_values(const GenerativeSpec& spec, const SceneObject& object) {
  std::vector<std::size_t> values;
  for (const auto& g : spec.groups) {
    std::size_t found = g.values.size();
    for (const auto& [key, value] : object.attributes) {
      if (key != g.name) continue;
      for (std::size_t v = 0; v < g.values.size(); ++v) {
        if (g.values[v] == value) found = v;
      }
    }
    if (found == g.values.size()) {
      fail(ErrorKind::NotFound, "object '" + object.id + "' has no value for '" + g.name + "'");
    }
    values.push_back(found);
  }
  return values;
}

Scene scene_with_kind(const GenerativeSpec& spec, const std::vector<std::size_t>& kind,
                      std::size_t n_objects, std::string scene_id, std::mt19937_64& rng,
                      std::string* target_id) {
  spec.validate();
  if (kind.size() != spec.groups.size()) {
    fail(ErrorKind::InvalidArgument, "kind needs one value per attribute group");
  }
  for (std::size_t g = 0; g < kind.size(); ++g) {
    if (kind[g] >= spec.groups[g].values.size()) {
      fail(ErrorKind::InvalidArgument, "kind value out of range for '" + spec.groups[g].name + "'");
    }
  }
  if (n_objects < 2) fail(ErrorKind::InvalidArgument, "objects_per_scene must be >= 2");
  std::uniform_int_distribution<std::size_t> slot_pick(0, n_objects - 1);
  const std::size_t slot = slot_pick(rng);
  Scene scene;
  scene.id = std::move(scene_id);
  for (std::size_t j = 0; j < n_objects; ++j) {
    ObjectTruth t = sample_truth(spec, rng);
    if (j == slot) {
      t.values = kind;
    } else {
      while (t.values == kind) t = sample_truth(spec, rng);
    }
    const std::string id = scene.id + "o" + std::to_string(j);
    if (j == slot && target_id != nullptr) *target_id = id;
    scene.objects.push_back(make_object(spec, t, id, rng));
  }
  return scene;
}

FastMappingTrial make_fast_mapping_trial(const GenerativeSpec& spec, std::uint64_t seed,
                                         std::size_t objects_per_scene, std::string word) {
  spec.validate();
  if (spec.groups.empty()) {
    fail(ErrorKind::InvalidArgument, "fast-mapping trials need attribute groups");
  }
  std::mt19937_64 rng(seed);
  const ObjectTruth kind = sample_truth(spec, rng);
  FastMappingTrial trial;
  trial.word = std::move(word);
  const std::string tag = "fm" + std::to_string(seed);
  trial.teach_scene =
      scene_with_kind(spec, kind.values, objects_per_scene, tag + "teach", rng, &trial.gold_id);
  trial.test_scene =
      scene_with_kind(spec, kind.values, objects_per_scene, tag + "test", rng, &trial.target_id);
  return trial;
}

}  // namespace wac
