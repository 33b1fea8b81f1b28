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

#include "wac/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "wac/error.hpp"

namespace wac {

void Scene::validate(std::size_t dim) const {
  if (objects.empty()) fail(ErrorKind::InvalidArgument, "scene '" + id + "' has no objects");
  std::unordered_set<std::string> seen;
  for (const auto& obj : objects) {
    if (!seen.insert(obj.id).second) {
      fail(ErrorKind::InvalidArgument,
           "scene '" + id + "': duplicate object id '" + obj.id + "'");
    }
    check_features(obj.features, dim, "scene '" + id + "' object '" + obj.id + "'");
  }
}

std::size_t Scene::index_of(std::string_view object_id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == object_id) return i;
  }
  return npos;
}

std::size_t ReferentDistribution::argmax() const {
  if (probs.empty()) fail(ErrorKind::InvalidArgument, "argmax of an empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

double ReferentDistribution::prob_of(std::string_view object_id) const {
  for (std::size_t i = 0; i < object_ids.size(); ++i) {
    if (object_ids[i] == object_id) return probs[i];
  }
  fail(ErrorKind::NotFound, "object '" + std::string(object_id) + "' not in distribution");
}

double log_fit(const WordClassifier& classifier, std::span<const double> x,
               double eps) {
  return std::log(std::max(fit_probability(classifier, x), eps));
}

double product_from_logs(std::span<const double> log_factors) {
  double sum = 0.0;
  for (double l : log_factors) sum += l;
  return std::exp(sum);
}

double score_phrase(const Lexicon& lex, std::span<const std::string> tokens,
                    std::span<const double> x) {
  check_features(x, lex.dim(), "score_phrase features");
  std::vector<double> logs;
  logs.reserve(tokens.size());
  const double eps = lex.config().prob_clamp_eps;
  for (const auto& tok : tokens) {
    const auto* c = lex.find(tok);
    logs.push_back(c ? log_fit(*c, x, eps) : std::log(kUnknownWordFactor));
  }
  return product_from_logs(logs);
}

ReferentDistribution normalize_log_scores(const Scene& scene,
                                          std::span<const double> log_scores) {
  ReferentDistribution dist;
  const std::size_t n = scene.objects.size();
  dist.object_ids.reserve(n);
  for (const auto& obj : scene.objects) dist.object_ids.push_back(obj.id);
  dist.probs.assign(n, 0.0);
  if (n == 0) return dist;

  double max_log = -std::numeric_limits<double>::infinity();
  for (double l : log_scores) max_log = std::max(max_log, l);
  if (!std::isfinite(max_log)) {
    std::fill(dist.probs.begin(), dist.probs.end(), 1.0 / static_cast<double>(n));
    return dist;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dist.probs[i] = std::exp(log_scores[i] - max_log);
    total += dist.probs[i];
  }
  for (auto& p : dist.probs) p /= total;
  return dist;
}

ResolutionState::ResolutionState(const Scene& scene)
    : scene_(&scene), log_scores_(scene.objects.size(), 0.0) {
  if (scene.objects.empty()) {
    fail(ErrorKind::InvalidArgument, "scene '" + scene.id + "' has no objects");
  }
}

void ResolutionState::feed(const Lexicon& lex, std::string_view token) {
  const auto* c = lex.find(token);
  if (c != nullptr) {
    const double eps = lex.config().prob_clamp_eps;
    std::vector<double> next(log_scores_);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] += log_fit(*c, scene_->objects[i].features, eps);
    }
    log_scores_ = std::move(next);
  } else {
    ++unknown_;
  }
  ++consumed_;
}

ReferentDistribution ResolutionState::distribution() const {
  return normalize_log_scores(*scene_, log_scores_);
}

std::vector<double> ResolutionState::raw_scores() const {
  std::vector<double> out(log_scores_.size());
  const double unknown_log = static_cast<double>(unknown_) * std::log(kUnknownWordFactor);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(log_scores_[i] + unknown_log);
  }
  return out;
}

ReferentDistribution resolve(const Lexicon& lex,
                             std::span<const std::string> tokens,
                             const Scene& scene) {
  scene.validate(lex.dim());
  ResolutionState state(scene);
  for (const auto& tok : tokens) state.feed(lex, tok);
  return state.distribution();
}

std::size_t gold_rank(const ReferentDistribution& dist, std::size_t gold_index) {
  const double g = dist.probs.at(gold_index);
  std::size_t rank = 1;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    if (dist.probs[i] > g || (i < gold_index && dist.probs[i] == g)) ++rank;
  }
  return rank;
}

SceneIndex index_scenes(std::span<const Scene> scenes) {
  SceneIndex index;
  for (const auto& s : scenes) {
    if (!index.emplace(s.id, &s).second) {
      fail(ErrorKind::InvalidArgument, "duplicate scene id '" + s.id + "'");
    }
  }
  return index;
}

std::pair<const Scene*, std::size_t> locate_episode(const SceneIndex& scenes,
                                                    const Episode& episode,
                                                    std::size_t episode_index) {
  const std::string where = "episode " + std::to_string(episode_index);
  auto it = scenes.find(episode.scene_id);
  if (it == scenes.end()) {
    fail(ErrorKind::NotFound, where + ": unknown scene '" + episode.scene_id + "'");
  }
  const std::size_t gold = it->second->index_of(episode.gold_id);
  if (gold == Scene::npos) {
    fail(ErrorKind::NotFound, where + ": gold object '" + episode.gold_id +
                                  "' not in scene '" + episode.scene_id + "'");
  }
  return {it->second, gold};
}

EvalMetrics metrics_from_ranks(std::span<const std::size_t> ranks) {
  EvalMetrics m;
  m.episodes = ranks.size();
  if (ranks.empty()) return m;
  double hits = 0.0, rr = 0.0, rank_sum = 0.0;
  for (std::size_t r : ranks) {
    if (r == 1) hits += 1.0;
    rr += 1.0 / static_cast<double>(r);
    rank_sum += static_cast<double>(r);
  }
  const double n = static_cast<double>(ranks.size());
  m.accuracy_at_1 = hits / n;
  m.mrr = rr / n;
  m.mean_gold_rank = rank_sum / n;
  return m;
}

EvalMetrics evaluate(const Lexicon& lex, std::span<const Episode> episodes,
                     std::span<const Scene> scenes) {
  const auto index = index_scenes(scenes);
  std::vector<std::size_t> ranks;
  ranks.reserve(episodes.size());
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    auto [scene, gold] = locate_episode(index, episodes[e], e);
    ranks.push_back(gold_rank(resolve(lex, episodes[e].tokens, *scene), gold));
  }
  return metrics_from_ranks(ranks);
}

}  // namespace wac
