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

#include "wac/teach.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "wac/error.hpp"

namespace wac::teach {

namespace {

std::string utc_timestamp() {
  using clock = std::chrono::system_clock;
  const auto now = clock::now();
  const auto t = clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace

void apply_interaction(Lexicon& lex, const Scene& scene, std::span<const std::string> tokens,
                       std::size_t gold_index, std::uint64_t frame_seed, std::size_t frames,
                       double jitter_sigma) {
  if (gold_index >= scene.objects.size()) {
    fail(ErrorKind::InvalidArgument, "gold index outside the scene");
  }
  const auto positives = jitter_frames(scene.objects[gold_index].features, frames, jitter_sigma,
                                       frame_seed);
  std::vector<FeatureVector> negatives;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (i != gold_index) negatives.push_back(scene.objects[i].features);
  }
  std::vector<std::string> seen;
  for (const auto& tok : tokens) {
    if (std::find(seen.begin(), seen.end(), tok) != seen.end()) continue;
    seen.push_back(tok);
    lex.update_word(tok, positives, negatives);
  }
}

Lexicon replay(Lexicon base, std::span<const LogEntry> log) {
  for (const auto& entry : log) {
    const std::size_t gold = entry.scene.index_of(entry.gold_id);
    if (gold == Scene::npos) {
      fail(ErrorKind::NotFound, "log entry " + std::to_string(entry.index) + ": gold '" +
                                    entry.gold_id + "' not in its scene");
    }
    entry.scene.validate(base.dim());
    apply_interaction(base, entry.scene, entry.tokens, gold, entry.frame_seed, entry.frames,
                      entry.jitter_sigma);
  }
  return base;
}

TeachService::Session::Session(std::string id_, GenerativeSpec spec_, TeachSettings settings_,
                               std::uint64_t seed_, Lexicon lex_)
    : id(std::move(id_)),
      spec(std::move(spec_)),
      settings(settings_),
      seed(seed_),
      rng(seed_),
      lex(std::move(lex_)) {}

void TeachService::advance_scene(Session& s) {
  s.scene = generate_scene(s.spec, s.id + "-scene" + std::to_string(s.scenes_served),
                           s.settings.objects_per_scene, s.rng);
  ++s.scenes_served;
}

std::string TeachService::create_session(const GenerativeSpec& spec, std::uint64_t seed,
                                         std::optional<Lexicon> base, TeachSettings settings) {
  spec.validate();
  if (settings.objects_per_scene < 2) {
    fail(ErrorKind::InvalidArgument, "objects_per_scene must be >= 2");
  }
  if (settings.frames == 0) fail(ErrorKind::InvalidArgument, "frames must be >= 1");
  Lexicon lex = base ? std::move(*base) : Lexicon(spec.dim());
  if (lex.dim() != spec.dim()) {
    fail(ErrorKind::Dimension, "base lexicon dimension " + std::to_string(lex.dim()) +
                                   " does not match the scene generator's " +
                                   std::to_string(spec.dim()));
  }
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = "session-" + std::to_string(next_id_++);
  auto session = std::make_shared<Session>(id, spec, settings, seed, std::move(lex));
  advance_scene(*session);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<TeachService::Session> TeachService::get(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorKind::NotFound, "unknown session '" + session_id + "'");
  return it->second;
}

Scene TeachService::scene(const std::string& session_id) const {
  auto s = get(session_id);
  std::shared_lock lock(s->mu);
  return s->scene;
}

ReferentDistribution TeachService::preview(const std::string& session_id,
                                           std::span<const std::string> tokens) const {
  auto s = get(session_id);
  std::shared_lock lock(s->mu);
  return resolve(s->lex, tokens, s->scene);
}

std::vector<ReferentDistribution> TeachService::preview_prefixes(
    const std::string& session_id, std::span<const std::string> tokens) const {
  auto s = get(session_id);
  std::shared_lock lock(s->mu);
  ResolutionState state(s->scene);
  std::vector<ReferentDistribution> out;
  for (const auto& tok : tokens) {
    state.feed(s->lex, tok);
    out.push_back(state.distribution());
  }
  return out;
}

LogEntry TeachService::teach(const std::string& session_id, std::span<const std::string> tokens,
                             const std::string& gold_id) {
  auto s = get(session_id);
  std::unique_lock lock(s->mu);
  if (tokens.empty()) fail(ErrorKind::InvalidArgument, "teach needs at least one token");
  const std::size_t gold = s->scene.index_of(gold_id);
  if (gold == Scene::npos) {
    fail(ErrorKind::InvalidArgument,
         "object '" + gold_id + "' is not in scene '" + s->scene.id + "'");
  }
  LogEntry entry;
  entry.index = s->log.size();
  entry.scene = s->scene;
  entry.tokens.assign(tokens.begin(), tokens.end());
  entry.gold_id = gold_id;
  entry.frame_seed = derive_seed(s->seed, entry.index);
  entry.frames = s->settings.frames;
  entry.jitter_sigma = s->spec.noise_sigma;
  entry.pre = resolve(s->lex, tokens, s->scene);

  Lexicon next = s->lex;
  apply_interaction(next, s->scene, tokens, gold, entry.frame_seed, entry.frames,
                    entry.jitter_sigma);
  entry.post = resolve(next, tokens, s->scene);
  entry.timestamp = utc_timestamp();
  s->lex = std::move(next);
  s->log.push_back(entry);
  return entry;
}

Scene TeachService::next_scene(const std::string& session_id) {
  auto s = get(session_id);
  std::unique_lock lock(s->mu);
  advance_scene(*s);
  return s->scene;
}

Lexicon TeachService::export_lexicon(const std::string& session_id) const {
  auto s = get(session_id);
  std::shared_lock lock(s->mu);
  return s->lex;
}

std::vector<LogEntry> TeachService::log(const std::string& session_id) const {
  auto s = get(session_id);
  std::shared_lock lock(s->mu);
  return s->log;
}

std::size_t TeachService::session_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sessions_.size();
}

}  // namespace wac::teach
