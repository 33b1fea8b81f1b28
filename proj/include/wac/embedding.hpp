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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wac/lexicon.hpp"

namespace wac {

enum class Modality { Visual, Textual, Fused };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view name);

/// Word vectors of one width. Immutable by convention: refreshing visual
/// vectors means exporting a new table.
struct EmbeddingTable {
  std::size_t dim = 0;
  Modality modality = Modality::Textual;
  /// True when visual vectors were exported without the classifier bias.
  bool bias_excluded = false;
  std::map<std::string, std::vector<double>> vectors;

  void validate() const;
  const std::vector<double>* find(std::string_view word) const;
  bool operator==(const EmbeddingTable&) const = default;
};

/// Classifier weights (bias excluded) as per-word visual vectors.
EmbeddingTable export_visual_embeddings(const Lexicon& lex);

/// Dense positive-PMI matrix over a corpus vocabulary (sorted).
struct PpmiMatrix {
  std::vector<std::string> vocab;
  std::vector<double> values;  // row-major vocab.size() x vocab.size()

  double at(std::size_t i, std::size_t j) const { return values[i * vocab.size() + j]; }
};

/// Symmetric co-occurrence counts within window tokens on either side,
/// turned into max(0, log(c_ij * total / (c_i * c_j))).
PpmiMatrix ppmi_matrix(std::span<const std::vector<std::string>> corpus,
                       std::size_t window);

/// PPMI rows projected to dim with a seeded Gaussian random matrix.
EmbeddingTable build_text_embeddings(std::span<const std::vector<std::string>> corpus,
                                     std::size_t window, std::size_t dim,
                                     std::uint64_t seed);

enum class FuseMethod { Add, Concat, Mult };

std::string_view to_string(FuseMethod m);
FuseMethod parse_fuse_method(std::string_view name);

struct FuseResult {
  EmbeddingTable table;
  /// Words dropped because the other table lacks them.
  std::vector<std::string> only_in_a;
  std::vector<std::string> only_in_b;
};

/// Element-wise sum, concatenation [a; b], or Hadamard product over the
/// vocabulary intersection.
FuseResult fuse(const EmbeddingTable& a, const EmbeddingTable& b, FuseMethod method);

double cosine(std::span<const double> a, std::span<const double> b);

/// Fit probabilities of every classifier for one object, in vocab order.
struct DenotationVector {
  std::vector<double> probs;
};

DenotationVector denotation_vector(const Lexicon& lex, std::span<const double> x);

class ValuesMatrix {
 public:
  ValuesMatrix(std::size_t rows, std::size_t cols);
  ValuesMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// sum_i w_i * row_i where w = probs, or probs / sum(probs) when normalize.
std::vector<double> attention_combine(const DenotationVector& d, const ValuesMatrix& v,
                                      bool normalize = true);

}  // namespace wac
