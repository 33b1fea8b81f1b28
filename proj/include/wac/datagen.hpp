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

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wac/composition.hpp"
#include "wac/lexicon.hpp"

namespace wac {

/// A categorical attribute (e.g. color) rendered as a one-hot feature block.
/// Each value doubles as the word that names it.
struct AttributeGroup {
  std::string name;
  std::vector<std::string> values;
};

/// Generative map from ground-truth attributes to features.
///
/// Layout: one one-hot block per group, in order, then (if position is on)
/// screen-x and screen-y in [-1, 1]. Gaussian noise of noise_sigma is added
/// to every feature. With side_words on, "left"/"right" name the sign of
/// screen-x and objects keep |x| >= side_margin.
struct GenerativeSpec {
  std::string name = "custom";
  std::vector<AttributeGroup> groups;
  bool position = true;
  bool side_words = false;
  double side_margin = 0.1;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  /// When set, must agree with the width computed from the layout.
  std::optional<std::size_t> declared_dim;

  std::size_t dim() const;
  void validate() const;
  /// Every word the generator can emit.
  std::vector<std::string> vocabulary() const;
  std::size_t position_offset() const;

  static GenerativeSpec left_right(std::uint64_t seed = 7);
  static GenerativeSpec color_shape(std::uint64_t seed = 7);
  static GenerativeSpec fast_mapping(std::uint64_t seed = 7);
  static GenerativeSpec preset(std::string_view name, std::uint64_t seed);
};

inline constexpr std::string_view kLeftWord = "left";
inline constexpr std::string_view kRightWord = "right";

/// Ground truth for one generated object.
struct ObjectTruth {
  std::vector<std::size_t> values;  // value index per attribute group
  double x = 0.0;
  double y = 0.0;
};

struct Dataset {
  std::size_t dim = 0;
  std::vector<Scene> scenes;
  std::vector<Episode> episodes;

  /// Sorted set of all tokens used by episodes.
  std::set<std::string> vocab() const;
  /// Referential integrity plus per-scene validation.
  void validate() const;
  bool operator==(const Dataset&) const = default;
};

struct GenerateOptions {
  std::size_t n_scenes = 500;
  std::size_t objects_per_scene = 5;
  std::size_t tokens_per_expression = 2;
  /// Referring expressions per scene; 0 describes every object once.
  std::size_t episodes_per_scene = 1;
};

ObjectTruth sample_truth(const GenerativeSpec& spec, std::mt19937_64& rng);
FeatureVector render_features(const GenerativeSpec& spec, const ObjectTruth& truth,
                              std::mt19937_64& rng);
/// Words that are true of the object under the spec, in layout order.
std::vector<std::string> true_words(const GenerativeSpec& spec, const ObjectTruth& truth);
/// Attributes are sorted by key.
SceneObject make_object(const GenerativeSpec& spec, const ObjectTruth& truth,
                        std::string id, std::mt19937_64& rng);
Scene generate_scene(const GenerativeSpec& spec, std::string scene_id,
                     std::size_t n_objects, std::mt19937_64& rng);

/// Deterministic for a fixed spec.seed. Expressions use the gold object's
/// true words, most discriminating within the scene first, emitted in
/// layout order.
Dataset generate(const GenerativeSpec& spec, const GenerateOptions& options);

/// Features of the gold objects of every episode whose tokens contain word.
std::vector<FeatureVector> positives_for(const Dataset& data, std::string_view word);

struct NegativeSample {
  std::vector<std::string> object_ids;
  std::vector<FeatureVector> features;
};

/// ceil(ratio * positive_count) distinct objects, drawn uniformly without
/// replacement from objects that are never the gold referent of an episode
/// containing word. A smaller eligible pool is returned whole.
NegativeSample sample_negatives(const Dataset& data, std::string_view word,
                                double ratio, std::size_t positive_count,
                                std::uint64_t seed);
/// Uses the number of positives for word in the dataset.
NegativeSample sample_negatives(const Dataset& data, std::string_view word,
                                double ratio, std::uint64_t seed);

std::size_t negative_count(double ratio, std::size_t positive_count);

/// One training set per vocabulary word (sorted), negatives sampled with a
/// per-word seed derived from seed.
std::vector<TrainingSet> build_training_sets(const Dataset& data, double neg_ratio,
                                             std::uint64_t seed);

/// n_frames noisy copies of features (the "camera frames" of one use).
std::vector<FeatureVector> jitter_frames(std::span<const double> features,
                                         std::size_t n_frames, double sigma,
                                         std::uint64_t seed);

/// Mixes a base seed with a stream index (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Inverse of the attribute labels written by make_object.
std::vector<std::size_t> attribute_values(const GenerativeSpec& spec, const SceneObject& object);

/// A scene with exactly one object of the given kind (one value index per
/// group); the others differ from it in at least one attribute.
Scene scene_with_kind(const GenerativeSpec& spec, const std::vector<std::size_t>& kind,
                      std::size_t n_objects, std::string scene_id, std::mt19937_64& rng,
                      std::string* target_id = nullptr);

/// A single-exposure word-learning trial: the novel word names the attribute
/// combination of the gold object in teach_scene; test_scene holds exactly
/// one object of that kind.
struct FastMappingTrial {
  std::string word;
  Scene teach_scene;
  std::string gold_id;
  Scene test_scene;
  std::string target_id;
};

FastMappingTrial make_fast_mapping_trial(const GenerativeSpec& spec,
                                         std::uint64_t seed,
                                         std::size_t objects_per_scene = 4,
                                         std::string word = "wug");

}  // namespace wac
