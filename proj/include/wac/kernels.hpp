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

// Data-parallel kernels. Every kernel has a serial reference and an OpenMP
// version that performs the same floating-point operations in the same
// order per output element, so the two agree bit for bit.

#include <span>
#include <vector>

#include "wac/composition.hpp"
#include "wac/lexicon.hpp"

namespace wac::kernels {

enum class Exec { Serial, Parallel };

/// Fits one classifier per training set. Outcomes are in input order.
std::vector<TrainOutcome> fit_words(std::span<const TrainingSet> sets, std::size_t dim,
                                    const TrainConfig& config, Exec exec);

/// Fits all sets and commits them to the lexicon in input order, which
/// matches calling Lexicon::train_word on each set in turn.
void train_words(Lexicon& lex, std::span<const TrainingSet> sets, Exec exec);

/// objects.size() x lex.size() row-major matrix of fit probabilities, columns
/// in vocab order.
std::vector<double> denotation_matrix(const Lexicon& lex,
                                      std::span<const FeatureVector> objects, Exec exec);

/// out[j] = sum_i weights[i] * values[i * cols + j].
std::vector<double> weighted_row_sum(std::span<const double> weights,
                                     std::span<const double> values, std::size_t cols,
                                     Exec exec);

/// Gold rank of every episode.
std::vector<std::size_t> episode_ranks(const Lexicon& lex, std::span<const Episode> episodes,
                                       const SceneIndex& scenes, Exec exec);

EvalMetrics evaluate(const Lexicon& lex, std::span<const Episode> episodes,
                     std::span<const Scene> scenes, Exec exec);

}  // namespace wac::kernels
