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

#include "wac/io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "wac/error.hpp"
#include "wac/text_format.hpp"

namespace wac::io {

namespace {

using text::LineReader;

constexpr const char* kLexiconMagic = "wac-lexicon";
constexpr const char* kScenesMagic = "wac-scenes";
constexpr const char* kEpisodesMagic = "wac-episodes";
constexpr const char* kEmbeddingsMagic = "wac-embeddings";
constexpr const char* kFeaturesMagic = "wac-features";

void check_token(std::string_view token, const std::string& what) {
  if (token.empty()) fail(ErrorKind::InvalidArgument, what + " is empty");
  for (char c : token) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      fail(ErrorKind::InvalidArgument, what + " '" + std::string(token) + "' contains whitespace");
    }
  }
  if (token.front() == '#') {
    fail(ErrorKind::InvalidArgument, what + " '" + std::string(token) + "' starts with '#'");
  }
}

void write_values(std::ostream& out, std::span<const double> values) {
  for (double v : values) out << ' ' << text::format_double(v);
}

void read_header(LineReader& reader, const char* magic) {
  const auto line = reader.next();
  if (!line) throw ParseError(ErrorKind::Truncated, 1, "header", "empty input");
  const auto toks = text::split_ws(*line);
  if (toks.size() != 2 || toks[0] != magic) {
    reader.malformed("header", std::string("expected '") + magic + " <version>'");
  }
  const auto version = reader.parse_int(toks[1], "header.version");
  if (version != kFormatVersion) {
    throw ParseError(ErrorKind::Version, reader.line(), "header.version",
                     "unsupported version " + std::to_string(version) + ", expected " +
                         std::to_string(kFormatVersion));
  }
}

/// key=value tokens starting at toks[first]; every key must be in allowed
/// and appear once.
std::map<std::string, std::string> read_pairs(const LineReader& reader,
                                              const std::vector<std::string_view>& toks,
                                              std::size_t first, const std::string& prefix,
                                              std::initializer_list<std::string_view> required) {
  std::map<std::string, std::string> out;
  for (std::size_t i = first; i < toks.size(); ++i) {
    std::string_view k, v;
    if (!text::split_key_value(toks[i], k, v)) {
      reader.malformed(prefix, "expected key=value, got '" + std::string(toks[i]) + "'");
    }
    bool known = false;
    for (auto r : required) known = known || r == k;
    if (!known) reader.malformed(prefix + "." + std::string(k), "unknown key");
    if (!out.emplace(std::string(k), std::string(v)).second) {
      reader.malformed(prefix + "." + std::string(k), "duplicate key");
    }
  }
  for (auto r : required) {
    if (!out.count(std::string(r))) {
      reader.malformed(prefix + "." + std::string(r), "missing key");
    }
  }
  return out;
}

std::vector<double> read_values(const LineReader& reader,
                                const std::vector<std::string_view>& toks, std::size_t first,
                                std::size_t count, const std::string& field) {
  if (toks.size() < first + count) {
    reader.malformed(field, "expected " + std::to_string(count) + " values, got " +
                                std::to_string(toks.size() - std::min(first, toks.size())));
  }
  if (toks.size() > first + count) {
    reader.malformed(field, "expected " + std::to_string(count) + " values, got more");
  }
  std::vector<double> values(count);
  for (std::size_t j = 0; j < count; ++j) {
    values[j] = reader.parse_double(toks[first + j], field + "[" + std::to_string(j) + "]");
  }
  return values;
}

void read_end(LineReader& reader, const std::string& what) {
  const auto line = reader.require("end of " + what);
  const auto toks = text::split_ws(line);
  if (toks.size() != 1 || toks[0] != "end") {
    reader.malformed("end", "expected 'end' after " + what);
  }
  if (reader.next()) reader.malformed("end", "content after 'end'");
}

std::vector<std::string_view> expect_record(LineReader& reader, const std::string& line,
                                            std::string_view keyword,
                                            const std::string& field) {
  auto toks = text::split_ws(line);
  if (toks.empty() || toks[0] != keyword) {
    if (!toks.empty() && toks[0] == "end") {
      throw ParseError(ErrorKind::Truncated, reader.line(), field,
                       "'end' reached before all records were read");
    }
    reader.malformed(field, "expected '" + std::string(keyword) + "' record");
  }
  return toks;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::NotFound, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

// ---------------------------------------------------------------- lexicon

void save_lexicon(std::ostream& out, const Lexicon& lex) {
  const auto& c = lex.config();
  out << kLexiconMagic << ' ' << kFormatVersion << '\n';
  out << "dim=" << lex.dim() << " words=" << lex.size() << '\n';
  out << "config learning_rate=" << text::format_double(c.learning_rate)
      << " l2_lambda=" << text::format_double(c.l2_lambda) << " max_epochs=" << c.max_epochs
      << " tol=" << text::format_double(c.tol) << " neg_ratio=" << text::format_double(c.neg_ratio)
      << " cache_cap=" << c.cache_cap
      << " prob_clamp_eps=" << text::format_double(c.prob_clamp_eps) << '\n';
  for (const auto& w : lex.vocab_order()) {
    check_token(w, "word");
    const auto& cl = lex.at(w);
    out << "word " << w << " bias=" << text::format_double(cl.bias) << " n_pos=" << cl.n_pos
        << " n_neg=" << cl.n_neg << " update_count=" << cl.update_count << '\n';
    out << "weights";
    write_values(out, cl.weights);
    out << '\n';
  }
  out << "end\n";
}

Lexicon load_lexicon(std::istream& in) {
  LineReader reader(in);
  read_header(reader, kLexiconMagic);

  auto line = reader.require("dimensions");
  auto toks = text::split_ws(line);
  auto dims = read_pairs(reader, toks, 0, "header", {"dim", "words"});
  const auto dim = reader.parse_count(dims["dim"], "header.dim");
  const auto words = reader.parse_count(dims["words"], "header.words");
  if (dim == 0) reader.malformed("header.dim", "dimension must be >= 1");

  line = reader.require("config");
  toks = text::split_ws(line);
  if (toks.empty() || toks[0] != "config") reader.malformed("config", "expected config line");
  auto kv = read_pairs(reader, toks, 1, "config",
                       {"learning_rate", "l2_lambda", "max_epochs", "tol", "neg_ratio",
                        "cache_cap", "prob_clamp_eps"});
  TrainConfig config;
  config.learning_rate = reader.parse_double(kv["learning_rate"], "config.learning_rate");
  config.l2_lambda = reader.parse_double(kv["l2_lambda"], "config.l2_lambda");
  config.max_epochs = reader.parse_count(kv["max_epochs"], "config.max_epochs");
  config.tol = reader.parse_double(kv["tol"], "config.tol");
  config.neg_ratio = reader.parse_double(kv["neg_ratio"], "config.neg_ratio");
  config.cache_cap = reader.parse_count(kv["cache_cap"], "config.cache_cap");
  config.prob_clamp_eps = reader.parse_double(kv["prob_clamp_eps"], "config.prob_clamp_eps");
  try {
    config.validate();
  } catch (const Error& e) {
    reader.malformed("config", e.what());
  }

  Lexicon lex(dim, config);
  for (std::size_t i = 0; i < words; ++i) {
    const std::string field = "word[" + std::to_string(i) + "]";
    line = reader.require(field);
    toks = expect_record(reader, line, "word", field);
    if (toks.size() < 2) reader.malformed(field, "missing word");
    WordClassifier cl;
    cl.word = std::string(toks[1]);
    if (lex.contains(cl.word)) reader.malformed(field, "duplicate word '" + cl.word + "'");
    auto attrs = read_pairs(reader, toks, 2, field, {"bias", "n_pos", "n_neg", "update_count"});
    cl.bias = reader.parse_double(attrs["bias"], field + ".bias");
    cl.n_pos = reader.parse_count(attrs["n_pos"], field + ".n_pos");
    cl.n_neg = reader.parse_count(attrs["n_neg"], field + ".n_neg");
    cl.update_count = reader.parse_count(attrs["update_count"], field + ".update_count");

    line = reader.require(field + ".weights");
    toks = expect_record(reader, line, "weights", field + ".weights");
    cl.weights = read_values(reader, toks, 1, dim, field + ".weights");
    lex.insert(std::move(cl));
  }
  read_end(reader, "lexicon");
  return lex;
}

// ----------------------------------------------------------------- scenes

void save_scenes(std::ostream& out, std::size_t dim, std::span<const Scene> scenes) {
  out << kScenesMagic << ' ' << kFormatVersion << '\n';
  out << "dim=" << dim << " scenes=" << scenes.size() << '\n';
  for (const auto& s : scenes) {
    s.validate(dim);
    check_token(s.id, "scene id");
    out << "scene " << s.id << " objects=" << s.objects.size() << '\n';
    for (const auto& obj : s.objects) {
      check_token(obj.id, "object id");
      out << "object " << obj.id;
      for (const auto& [k, v] : obj.attributes) {
        check_token(k, "attribute key");
        check_token(v, "attribute value");
        if (k.find('=') != std::string::npos || k == ":" || v == ":") {
          fail(ErrorKind::InvalidArgument, "attribute '" + k + "' cannot be encoded");
        }
        out << ' ' << k << '=' << v;
      }
      out << " :";
      write_values(out, obj.features);
      out << '\n';
    }
  }
  out << "end\n";
}

std::pair<std::size_t, std::vector<Scene>> load_scenes(std::istream& in) {
  LineReader reader(in);
  read_header(reader, kScenesMagic);
  auto line = reader.require("dimensions");
  auto toks = text::split_ws(line);
  auto kv = read_pairs(reader, toks, 0, "header", {"dim", "scenes"});
  const auto dim = reader.parse_count(kv["dim"], "header.dim");
  const auto count = reader.parse_count(kv["scenes"], "header.scenes");
  if (dim == 0) reader.malformed("header.dim", "dimension must be >= 1");

  std::vector<Scene> scenes;
  std::unordered_set<std::string> scene_ids;
  for (std::size_t s = 0; s < count; ++s) {
    const std::string field = "scene[" + std::to_string(s) + "]";
    line = reader.require(field);
    toks = expect_record(reader, line, "scene", field);
    if (toks.size() != 3) reader.malformed(field, "expected 'scene <id> objects=<n>'");
    Scene scene;
    scene.id = std::string(toks[1]);
    if (!scene_ids.insert(scene.id).second) {
      reader.malformed(field, "duplicate scene id '" + scene.id + "'");
    }
    auto skv = read_pairs(reader, toks, 2, field, {"objects"});
    const auto n_objects = reader.parse_count(skv["objects"], field + ".objects");
    if (n_objects == 0) reader.malformed(field + ".objects", "scene has no objects");
    std::unordered_set<std::string> object_ids;
    for (std::size_t j = 0; j < n_objects; ++j) {
      const std::string ofield = field + ".object[" + std::to_string(j) + "]";
      line = reader.require(ofield);
      toks = expect_record(reader, line, "object", ofield);
      if (toks.size() < 3) reader.malformed(ofield, "missing object id or ':'");
      SceneObject obj;
      obj.id = std::string(toks[1]);
      if (!object_ids.insert(obj.id).second) {
        reader.malformed(ofield, "duplicate object id '" + obj.id + "'");
      }
      std::size_t i = 2;
      for (; i < toks.size() && toks[i] != ":"; ++i) {
        std::string_view k, v;
        if (!text::split_key_value(toks[i], k, v) || k.empty() || v.empty()) {
          reader.malformed(ofield + ".attributes", "expected key=value, got '" +
                                                       std::string(toks[i]) + "'");
        }
        obj.attributes.emplace_back(std::string(k), std::string(v));
      }
      if (i == toks.size()) reader.malformed(ofield, "missing ':' before features");
      obj.features = read_values(reader, toks, i + 1, dim, ofield + ".features");
      scene.objects.push_back(std::move(obj));
    }
    scenes.push_back(std::move(scene));
  }
  read_end(reader, "scenes");
  return {dim, std::move(scenes)};
}

// --------------------------------------------------------------- episodes

void save_episodes(std::ostream& out, std::span<const Episode> episodes) {
  out << kEpisodesMagic << ' ' << kFormatVersion << '\n';
  out << "episodes=" << episodes.size() << '\n';
  for (const auto& ep : episodes) {
    check_token(ep.scene_id, "scene id");
    check_token(ep.gold_id, "gold id");
    out << "episode " << ep.scene_id << ' ' << ep.gold_id;
    for (const auto& t : ep.tokens) {
      check_token(t, "token");
      out << ' ' << t;
    }
    out << '\n';
  }
  out << "end\n";
}

std::vector<Episode> load_episodes(std::istream& in) {
  LineReader reader(in);
  read_header(reader, kEpisodesMagic);
  auto line = reader.require("episode count");
  auto toks = text::split_ws(line);
  auto kv = read_pairs(reader, toks, 0, "header", {"episodes"});
  const auto count = reader.parse_count(kv["episodes"], "header.episodes");
  std::vector<Episode> episodes;
  for (std::size_t e = 0; e < count; ++e) {
    const std::string field = "episode[" + std::to_string(e) + "]";
    line = reader.require(field);
    toks = expect_record(reader, line, "episode", field);
    if (toks.size() < 3) reader.malformed(field, "expected 'episode <scene> <gold> tokens...'");
    Episode ep;
    ep.scene_id = std::string(toks[1]);
    ep.gold_id = std::string(toks[2]);
    for (std::size_t i = 3; i < toks.size(); ++i) ep.tokens.emplace_back(toks[i]);
    episodes.push_back(std::move(ep));
  }
  read_end(reader, "episodes");
  return episodes;
}

// ------------------------------------------------------------- embeddings

void save_embeddings(std::ostream& out, const EmbeddingTable& table) {
  table.validate();
  out << kEmbeddingsMagic << ' ' << kFormatVersion << '\n';
  out << "dim=" << table.dim << " modality=" << to_string(table.modality)
      << " bias_excluded=" << (table.bias_excluded ? 1 : 0) << " count=" << table.vectors.size()
      << '\n';
  for (const auto& [word, vec] : table.vectors) {
    check_token(word, "word");
    out << "vec " << word;
    write_values(out, vec);
    out << '\n';
  }
  out << "end\n";
}

EmbeddingTable load_embeddings(std::istream& in) {
  LineReader reader(in);
  read_header(reader, kEmbeddingsMagic);
  auto line = reader.require("table header");
  auto toks = text::split_ws(line);
  auto kv = read_pairs(reader, toks, 0, "header", {"dim", "modality", "bias_excluded", "count"});
  EmbeddingTable table;
  table.dim = reader.parse_count(kv["dim"], "header.dim");
  if (table.dim == 0) reader.malformed("header.dim", "dimension must be >= 1");
  try {
    table.modality = parse_modality(kv["modality"]);
  } catch (const Error& e) {
    reader.malformed("header.modality", e.what());
  }
  const auto flag = reader.parse_count(kv["bias_excluded"], "header.bias_excluded");
  if (flag > 1) reader.malformed("header.bias_excluded", "expected 0 or 1");
  table.bias_excluded = flag == 1;
  const auto count = reader.parse_count(kv["count"], "header.count");
  for (std::size_t i = 0; i < count; ++i) {
    const std::string field = "vec[" + std::to_string(i) + "]";
    line = reader.require(field);
    toks = expect_record(reader, line, "vec", field);
    if (toks.size() < 2) reader.malformed(field, "missing word");
    std::string word(toks[1]);
    auto values = read_values(reader, toks, 2, table.dim, field + ".values");
    if (!table.vectors.emplace(word, std::move(values)).second) {
      reader.malformed(field, "duplicate word '" + word + "'");
    }
  }
  read_end(reader, "embeddings");
  return table;
}

// --------------------------------------------------------------- features

void save_features(std::ostream& out, const FeatureFile& file) {
  check_token(file.source, "source tag");
  out << kFeaturesMagic << ' ' << kFormatVersion << '\n';
  out << "dim=" << file.dim << " count=" << file.records.size() << " source=" << file.source
      << '\n';
  for (const auto& [id, vec] : file.records) {
    check_token(id, "object id");
    check_features(vec, file.dim, "record '" + id + "'");
    out << "record " << id;
    write_values(out, vec);
    out << '\n';
  }
  out << "end\n";
}

FeatureFile load_features(std::istream& in, std::vector<std::string>* warnings) {
  LineReader reader(in);
  read_header(reader, kFeaturesMagic);
  auto line = reader.require("feature header");
  auto toks = text::split_ws(line);
  auto kv = read_pairs(reader, toks, 0, "header", {"dim", "count", "source"});
  FeatureFile file;
  file.dim = reader.parse_count(kv["dim"], "header.dim");
  if (file.dim == 0) reader.malformed("header.dim", "dimension must be >= 1");
  file.source = kv["source"];
  if (file.source.empty()) reader.malformed("header.source", "empty source tag");
  const auto count = reader.parse_count(kv["count"], "header.count");
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string field = "record[" + std::to_string(i) + "]";
    line = reader.require(field);
    toks = expect_record(reader, line, "record", field);
    if (toks.size() < 2) reader.malformed(field, "missing object id");
    std::string id(toks[1]);
    auto values = read_values(reader, toks, 2, file.dim, field + ".values");
    if (!ids.insert(id).second && warnings != nullptr) {
      warnings->push_back("line " + std::to_string(reader.line()) + ": duplicate object id '" +
                          id + "'");
    }
    file.records.emplace_back(std::move(id), std::move(values));
  }
  read_end(reader, "features");
  return file;
}

// ------------------------------------------------------------------ files

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::NotFound, "cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) fail(ErrorKind::Internal, "write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_lexicon_file(const std::filesystem::path& path, const Lexicon& lex) {
  std::ostringstream out;
  save_lexicon(out, lex);
  write_file_atomic(path, out.str());
}

Lexicon load_lexicon_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_lexicon(in);
}

void save_embeddings_file(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ostringstream out;
  save_embeddings(out, table);
  write_file_atomic(path, out.str());
}

EmbeddingTable load_embeddings_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_embeddings(in);
}

FeatureFile load_features_file(const std::filesystem::path& path,
                               std::vector<std::string>* warnings) {
  auto in = open_in(path);
  return load_features(in, warnings);
}

void save_features_file(const std::filesystem::path& path, const FeatureFile& file) {
  std::ostringstream out;
  save_features(out, file);
  write_file_atomic(path, out.str());
}

void save_dataset(std::ostream& scenes_out, std::ostream& episodes_out, const Dataset& data) {
  data.validate();
  save_scenes(scenes_out, data.dim, data.scenes);
  save_episodes(episodes_out, data.episodes);
}

Dataset load_dataset(std::istream& scenes_in, std::istream& episodes_in) {
  Dataset data;
  auto [dim, scenes] = load_scenes(scenes_in);
  data.dim = dim;
  data.scenes = std::move(scenes);
  data.episodes = load_episodes(episodes_in);
  data.validate();
  return data;
}

void save_dataset(const std::filesystem::path& prefix, const Dataset& data) {
  std::ostringstream scenes, episodes;
  save_dataset(scenes, episodes, data);
  auto sp = prefix;
  sp += ".scenes";
  auto ep = prefix;
  ep += ".episodes";
  write_file_atomic(sp, scenes.str());
  write_file_atomic(ep, episodes.str());
}

Dataset load_dataset(const std::filesystem::path& prefix) {
  auto sp = prefix;
  sp += ".scenes";
  auto ep = prefix;
  ep += ".episodes";
  auto sin = open_in(sp);
  auto ein = open_in(ep);
  return load_dataset(sin, ein);
}

}  // namespace wac::io
