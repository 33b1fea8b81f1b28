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

// Line-oriented text formats. Every file starts with "<magic> <version>";
// doubles are written in shortest round-trip form. See docs/formats.md.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wac/composition.hpp"
#include "wac/datagen.hpp"
#include "wac/embedding.hpp"
#include "wac/lexicon.hpp"

namespace wac::io {

inline constexpr int kFormatVersion = 1;

void save_lexicon(std::ostream& out, const Lexicon& lex);
Lexicon load_lexicon(std::istream& in);

void save_scenes(std::ostream& out, std::size_t dim, std::span<const Scene> scenes);
/// Returns the declared dimension and the scenes.
std::pair<std::size_t, std::vector<Scene>> load_scenes(std::istream& in);

void save_episodes(std::ostream& out, std::span<const Episode> episodes);
std::vector<Episode> load_episodes(std::istream& in);

void save_embeddings(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable load_embeddings(std::istream& in);

/// Canonical per-object feature file shared with external exporters.
struct FeatureFile {
  std::size_t dim = 0;
  std::string source;
  std::vector<std::pair<std::string, FeatureVector>> records;

  bool operator==(const FeatureFile&) const = default;
};

void save_features(std::ostream& out, const FeatureFile& file);
/// Non-fatal findings (e.g. duplicate object ids) go to warnings when given.
FeatureFile load_features(std::istream& in, std::vector<std::string>* warnings = nullptr);

// Path helpers. Opening failures throw NotFound.
void save_lexicon_file(const std::filesystem::path& path, const Lexicon& lex);
Lexicon load_lexicon_file(const std::filesystem::path& path);
void save_embeddings_file(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable load_embeddings_file(const std::filesystem::path& path);
FeatureFile load_features_file(const std::filesystem::path& path,
                               std::vector<std::string>* warnings = nullptr);
void save_features_file(const std::filesystem::path& path, const FeatureFile& file);

/// A dataset is stored as <prefix>.scenes and <prefix>.episodes.
void save_dataset(const std::filesystem::path& prefix, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& prefix);
void save_dataset(std::ostream& scenes_out, std::ostream& episodes_out, const Dataset& data);
Dataset load_dataset(std::istream& scenes_in, std::istream& episodes_in);

/// Writes through a temporary file and renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace wac::io
