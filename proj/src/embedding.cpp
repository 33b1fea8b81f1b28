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

#include "wac/embedding.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

#include "wac/error.hpp"
#include "wac/kernels.hpp"

namespace wac {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Visual: return "visual";
    case Modality::Textual: return "textual";
    case Modality::Fused: return "fused";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "visual") return Modality::Visual;
  if (name == "textual") return Modality::Textual;
  if (name == "fused") return Modality::Fused;
  fail(ErrorKind::InvalidArgument, "unknown modality '" + std::string(name) + "'");
}

std::string_view to_string(FuseMethod m) {
  switch (m) {
    case FuseMethod::Add: return "add";
    case FuseMethod::Concat: return "concat";
    case FuseMethod::Mult: return "mult";
  }
  return "unknown";
}

FuseMethod parse_fuse_method(std::string_view name) {
  if (name == "add") return FuseMethod::Add;
  if (name == "concat") return FuseMethod::Concat;
  if (name == "mult") return FuseMethod::Mult;
  fail(ErrorKind::InvalidArgument, "unknown fuse method '" + std::string(name) + "'");
}

void EmbeddingTable::validate() const {
  if (dim == 0) fail(ErrorKind::InvalidArgument, "embedding dimension is 0");
  for (const auto& [word, vec] : vectors) check_features(vec, dim, "embedding '" + word + "'");
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  auto it = vectors.find(std::string(word));
  return it == vectors.end() ? nullptr : &it->second;
}

EmbeddingTable export_visual_embeddings(const Lexicon& lex) {
  if (lex.empty()) fail(ErrorKind::InvalidArgument, "cannot export embeddings of an empty lexicon");
  EmbeddingTable table;
  table.dim = lex.dim();
  table.modality = Modality::Visual;
  table.bias_excluded = true;
  for (const auto& w : lex.vocab_order()) table.vectors.emplace(w, lex.at(w).weights);
  return table;
}

PpmiMatrix ppmi_matrix(std::span<const std::vector<std::string>> corpus,
                       std::size_t window) {
  if (window == 0) fail(ErrorKind::InvalidArgument, "co-occurrence window must be >= 1");
  PpmiMatrix m;
  {
    std::map<std::string, std::size_t> ids;
    for (const auto& sentence : corpus) {
      for (const auto& tok : sentence) ids.emplace(tok, 0);
    }
    for (auto& [word, id] : ids) {
      id = m.vocab.size();
      m.vocab.push_back(word);
    }
  }
  if (m.vocab.empty()) fail(ErrorKind::InvalidArgument, "corpus is empty");
  std::unordered_map<std::string, std::size_t> id_of;
  for (std::size_t i = 0; i < m.vocab.size(); ++i) id_of.emplace(m.vocab[i], i);

  const std::size_t v = m.vocab.size();
  std::vector<double> counts(v * v, 0.0);
  for (const auto& sentence : corpus) {
    for (std::size_t t = 0; t < sentence.size(); ++t) {
      const std::size_t a = id_of.at(sentence[t]);
      for (std::size_t d = 1; d <= window && t + d < sentence.size(); ++d) {
        const std::size_t b = id_of.at(sentence[t + d]);
        counts[a * v + b] += 1.0;
        counts[b * v + a] += 1.0;
      }
    }
  }
  std::vector<double> row(v, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = 0; j < v; ++j) row[i] += counts[i * v + j];
    total += row[i];
  }
  m.values.assign(v * v, 0.0);
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = 0; j < v; ++j) {
      const double c = counts[i * v + j];
      if (c <= 0.0) continue;
      m.values[i * v + j] = std::max(0.0, std::log(c * total / (row[i] * row[j])));
    }
  }
  return m;
}

EmbeddingTable build_text_embeddings(std::span<const std::vector<std::string>> corpus,
                                     std::size_t window, std::size_t dim,
                                     std::uint64_t seed) {
  if (dim == 0) fail(ErrorKind::InvalidArgument, "embedding dimension must be >= 1");
  const auto ppmi = ppmi_matrix(corpus, window);
  const std::size_t v = ppmi.vocab.size();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> projection(v * dim);
  for (auto& r : projection) r = gauss(rng);

  EmbeddingTable table;
  table.dim = dim;
  table.modality = Modality::Textual;
  for (std::size_t i = 0; i < v; ++i) {
    std::span<const double> weights(ppmi.values.data() + i * v, v);
    table.vectors.emplace(ppmi.vocab[i], kernels::weighted_row_sum(weights, projection, dim,
                                                                   kernels::Exec::Serial));
  }
  return table;
}

FuseResult fuse(const EmbeddingTable& a, const EmbeddingTable& b, FuseMethod method) {
  if (method != FuseMethod::Concat && a.dim != b.dim) {
    fail(ErrorKind::Dimension, std::string(to_string(method)) + " fusion needs equal widths, got " +
                                   std::to_string(a.dim) + " and " + std::to_string(b.dim));
  }
  FuseResult out;
  out.table.dim = method == FuseMethod::Concat ? a.dim + b.dim : a.dim;
  out.table.modality = Modality::Fused;
  out.table.bias_excluded = a.bias_excluded || b.bias_excluded;
  for (const auto& [word, va] : a.vectors) {
    const auto* vb = b.find(word);
    if (vb == nullptr) {
      out.only_in_a.push_back(word);
      continue;
    }
    std::vector<double> fused;
    switch (method) {
      case FuseMethod::Add:
        fused.resize(a.dim);
        for (std::size_t j = 0; j < a.dim; ++j) fused[j] = va[j] + (*vb)[j];
        break;
      case FuseMethod::Mult:
        fused.resize(a.dim);
        for (std::size_t j = 0; j < a.dim; ++j) fused[j] = va[j] * (*vb)[j];
        break;
      case FuseMethod::Concat:
        fused = va;
        fused.insert(fused.end(), vb->begin(), vb->end());
        break;
    }
    out.table.vectors.emplace(word, std::move(fused));
  }
  for (const auto& [word, vb] : b.vectors) {
    if (a.find(word) == nullptr) out.only_in_b.push_back(word);
  }
  if (out.table.vectors.empty()) {
    fail(ErrorKind::InvalidArgument, "fusion: the tables share no words");
  }
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::Dimension, "cosine: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

DenotationVector denotation_vector(const Lexicon& lex, std::span<const double> x) {
  if (lex.empty()) fail(ErrorKind::InvalidArgument, "denotation vector of an empty lexicon");
  check_features(x, lex.dim(), "denotation features");
  DenotationVector d;
  d.probs.reserve(lex.size());
  for (const auto& w : lex.vocab_order()) d.probs.push_back(fit_probability(lex.at(w), x));
  return d;
}

ValuesMatrix::ValuesMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

ValuesMatrix::ValuesMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    fail(ErrorKind::Dimension, "values matrix data does not match rows x cols");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "values matrix has a non-finite entry");
  }
}

std::vector<double> attention_combine(const DenotationVector& d, const ValuesMatrix& v,
                                      bool normalize) {
  if (d.probs.size() != v.rows()) {
    fail(ErrorKind::Dimension, "attention_combine: " + std::to_string(d.probs.size()) +
                                   " probabilities vs " + std::to_string(v.rows()) +
                                   " value rows");
  }
  std::vector<double> weights = d.probs;
  if (normalize) {
    double total = 0.0;
    for (double p : weights) total += p;
    if (!(total > 0.0)) fail(ErrorKind::InvalidArgument, "attention_combine: zero total weight");
    for (auto& w : weights) w /= total;
  }
  return kernels::weighted_row_sum(weights, v.data(), v.cols(), kernels::Exec::Parallel);
}

}  // namespace wac
