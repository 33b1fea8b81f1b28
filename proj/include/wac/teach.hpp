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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "wac/composition.hpp"
#include "wac/datagen.hpp"
#include "wac/lexicon.hpp"

namespace wac::teach {

struct TeachSettings {
  std::size_t frames = 10;  // jittered copies of the gold object per use
  std::size_t objects_per_scene = 4;
};

/// One teaching interaction. Holds everything needed to replay it.
struct LogEntry {
  std::size_t index = 0;
  Scene scene;
  std::vector<std::string> tokens;
  std::string gold_id;
  std::uint64_t frame_seed = 0;
  std::size_t frames = 0;
  double jitter_sigma = 0.0;
  ReferentDistribution pre;
  ReferentDistribution post;
  std::string timestamp;
};

/// Fast-mapping step: every distinct token is updated with frames jittered
/// copies of the gold object as positives and the other scene objects as
/// negatives.
void apply_interaction(Lexicon& lex, const Scene& scene, std::span<const std::string> tokens,
                       std::size_t gold_index, std::uint64_t frame_seed, std::size_t frames,
                       double jitter_sigma);

/// Re-applies a logged session on top of base.
Lexicon replay(Lexicon base, std::span<const LogEntry> log);

/// Live teaching sessions. Sessions are independent; within one session
/// teach/next-scene are serialized and previews never observe a partially
/// applied update.
class TeachService {
 public:
  std::string create_session(const GenerativeSpec& spec, std::uint64_t seed,
                             std::optional<Lexicon> base = std::nullopt,
                             TeachSettings settings = {});

  Scene scene(const std::string& session_id) const;
  ReferentDistribution preview(const std::string& session_id,
                               std::span<const std::string> tokens) const;
  /// Distribution after each token prefix (1..n), for incremental display.
  std::vector<ReferentDistribution> preview_prefixes(const std::string& session_id,
                                                     std::span<const std::string> tokens) const;
  LogEntry teach(const std::string& session_id, std::span<const std::string> tokens,
                 const std::string& gold_id);
  Scene next_scene(const std::string& session_id);
  Lexicon export_lexicon(const std::string& session_id) const;
  std::vector<LogEntry> log(const std::string& session_id) const;

  std::size_t session_count() const;

 private:
  struct Session {
    Session(std::string id_, GenerativeSpec spec_, TeachSettings settings_, std::uint64_t seed_,
            Lexicon lex_);

    std::string id;
    GenerativeSpec spec;
    TeachSettings settings;
    std::uint64_t seed;
    std::mt19937_64 rng;
    std::size_t scenes_served = 0;
    Lexicon lex;
    Scene scene;
    std::vector<LogEntry> log;
    mutable std::shared_mutex mu;
  };

  std::shared_ptr<Session> get(const std::string& session_id) const;
  static void advance_scene(Session& s);

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace wac::teach
