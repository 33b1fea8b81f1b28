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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wac/lexicon.hpp"

namespace wac {

/// Factor contributed by a token with no classifier in the lexicon.
inline constexpr double kUnknownWordFactor = 0.5;

struct SceneObject {
  std::string id;
  FeatureVector features;
  /// Renderable attributes (color, shape, x, y, ...). Never read by the
  /// model; carried for display and for the teaching service.
  std::vector<std::pair<std::string, std::string>> attributes;

  bool operator==(const SceneObject&) const = default;
};

struct Scene {
  std::string id;
  std::vector<SceneObject> objects;

  /// At least one object, unique object ids, every feature vector of length
  /// dim and finite.
  void validate(std::size_t dim) const;
  /// Index of the object with this id, or npos.
  std::size_t index_of(std::string_view object_id) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  bool operator==(const Scene&) const = default;
};

struct ReferentDistribution {
  std::vector<std::string> object_ids;
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  /// First index with the maximal probability (ties go to scene order).
  std::size_t argmax() const;
  double prob_of(std::string_view object_id) const;
  bool operator==(const ReferentDistribution&) const = default;
};

/// log of a word's fit for x, floored at log(eps).
double log_fit(const WordClassifier& classifier, std::span<const double> x,
               double eps);

/// Product of the fit probabilities of all tokens for x, accumulated in log
/// space. Unknown tokens contribute 0.5; an empty phrase scores 1.
double score_phrase(const Lexicon& lex, std::span<const std::string> tokens,
                    std::span<const double> x);

/// exp(sum of logs). Shared with the TTR judgement so both agree exactly.
double product_from_logs(std::span<const double> log_factors);

/// Normalizes per-object log scores into a distribution (uniform when no
/// score is finite).
ReferentDistribution normalize_log_scores(const Scene& scene,
                                          std::span<const double> log_scores);

/// Token-at-a-time resolution over one scene. The scene must outlive the
/// state. Unknown tokens are counted but, being a constant factor, leave
/// the distribution untouched.
class ResolutionState {
 public:
  explicit ResolutionState(const Scene& scene);
  ResolutionState(Scene&&) = delete;

  void feed(const Lexicon& lex, std::string_view token);
  ReferentDistribution distribution() const;
  /// Unnormalized phrase scores, including unknown-token factors.
  std::vector<double> raw_scores() const;

  std::size_t tokens_consumed() const noexcept { return consumed_; }
  const std::vector<double>& log_scores() const noexcept { return log_scores_; }
  const Scene& scene() const noexcept { return *scene_; }

 private:
  const Scene* scene_;
  std::vector<double> log_scores_;
  std::size_t consumed_ = 0;
  std::size_t unknown_ = 0;
};

ReferentDistribution resolve(const Lexicon& lex,
                             std::span<const std::string> tokens,
                             const Scene& scene);

struct Episode {
  std::vector<std::string> tokens;
  std::string scene_id;
  std::string gold_id;

  bool operator==(const Episode&) const = default;
};

struct EvalMetrics {
  double accuracy_at_1 = 0.0;
  double mrr = 0.0;
  double mean_gold_rank = 0.0;
  std::size_t episodes = 0;
};

/// 1-based rank of the gold object; objects that tie with it and come
/// earlier in scene order rank ahead of it.
std::size_t gold_rank(const ReferentDistribution& dist, std::size_t gold_index);

using SceneIndex = std::unordered_map<std::string, const Scene*>;
SceneIndex index_scenes(std::span<const Scene> scenes);

/// Looks up the scene and gold object of one episode; throws NotFound
/// naming the episode when either is missing.
std::pair<const Scene*, std::size_t> locate_episode(const SceneIndex& scenes,
                                                    const Episode& episode,
                                                    std::size_t episode_index);

EvalMetrics metrics_from_ranks(std::span<const std::size_t> ranks);

EvalMetrics evaluate(const Lexicon& lex, std::span<const Episode> episodes,
                     std::span<const Scene> scenes);

}  // namespace wac
