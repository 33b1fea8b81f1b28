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

#include "wac/kernels.hpp"

#include <algorithm>

#include <exception>
#include <mutex>

#include "wac/error.hpp"

namespace wac::kernels {

namespace {

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the loop.
class FirstError {
 public:
  template <typename F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace

std::vector<TrainOutcome> fit_words(std::span<const TrainingSet> sets, std::size_t dim,
                                    const TrainConfig& config, Exec exec) {
  std::vector<TrainOutcome> out(sets.size());
  const auto n = static_cast<std::ptrdiff_t>(sets.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[i] = fit_word(sets[i].word, sets[i].pos, sets[i].neg, dim, config);
    }
    return out;
  }
  FirstError err;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    err.run([&] { out[i] = fit_word(sets[i].word, sets[i].pos, sets[i].neg, dim, config); });
  }
  err.rethrow();
  return out;
}

void train_words(Lexicon& lex, std::span<const TrainingSet> sets, Exec exec) {
  for (const auto& s : sets) lex.check_training_set(s.pos, s.neg);
  auto fitted = fit_words(sets, lex.dim(), lex.config(), exec);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    lex.commit_trained(std::move(fitted[i].classifier), sets[i].pos, sets[i].neg);
  }
}

std::vector<double> denotation_matrix(const Lexicon& lex,
                                      std::span<const FeatureVector> objects, Exec exec) {
  const std::size_t n = lex.size();
  const auto& order = lex.vocab_order();
  std::vector<const WordClassifier*> classifiers;
  classifiers.reserve(n);
  for (const auto& w : order) classifiers.push_back(&lex.at(w));
  for (std::size_t k = 0; k < objects.size(); ++k) {
    check_features(objects[k], lex.dim(), "object " + std::to_string(k));
  }

  std::vector<double> out(objects.size() * n);
  const auto rows = static_cast<std::ptrdiff_t>(objects.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t k = 0; k < rows; ++k) {
      for (std::size_t i = 0; i < n; ++i) out[k * n + i] = fit_probability(*classifiers[i], objects[k]);
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < rows; ++k) {
    for (std::size_t i = 0; i < n; ++i) out[k * n + i] = fit_probability(*classifiers[i], objects[k]);
  }
  return out;
}

std::vector<double> weighted_row_sum(std::span<const double> weights,
                                     std::span<const double> values, std::size_t cols,
                                     Exec exec) {
  if (values.size() != weights.size() * cols) {
    fail(ErrorKind::Dimension, "weighted_row_sum: values size does not match rows x cols");
  }
  const std::size_t rows = weights.size();
  std::vector<double> out(cols, 0.0);
  const auto c = static_cast<std::ptrdiff_t>(cols);
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::ptrdiff_t j = 0; j < c; ++j) out[j] += weights[i] * values[i * cols + j];
    }
    return out;
  }
  // Column tiles; each column still accumulates rows in order.
  constexpr std::ptrdiff_t kTile = 64;
  const std::ptrdiff_t tiles = (c + kTile - 1) / kTile;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < tiles; ++t) {
    const std::ptrdiff_t begin = t * kTile;
    const std::ptrdiff_t end = std::min(c, begin + kTile);
    for (std::size_t i = 0; i < rows; ++i) {
      const double w = weights[i];
      const double* row = values.data() + i * cols;
      for (std::ptrdiff_t j = begin; j < end; ++j) out[j] += w * row[j];
    }
  }
  return out;
}

std::vector<std::size_t> episode_ranks(const Lexicon& lex, std::span<const Episode> episodes,
                                       const SceneIndex& scenes, Exec exec) {
  std::vector<std::pair<const Scene*, std::size_t>> located;
  located.reserve(episodes.size());
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    located.push_back(locate_episode(scenes, episodes[e], e));
  }
  std::vector<std::size_t> ranks(episodes.size());
  const auto n = static_cast<std::ptrdiff_t>(episodes.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t e = 0; e < n; ++e) {
      ranks[e] = gold_rank(resolve(lex, episodes[e].tokens, *located[e].first),
                           located[e].second);
    }
    return ranks;
  }
  FirstError err;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t e = 0; e < n; ++e) {
    err.run([&] {
      ranks[e] = gold_rank(resolve(lex, episodes[e].tokens, *located[e].first),
                           located[e].second);
    });
  }
  err.rethrow();
  return ranks;
}

EvalMetrics evaluate(const Lexicon& lex, std::span<const Episode> episodes,
                     std::span<const Scene> scenes, Exec exec) {
  const auto index = index_scenes(scenes);
  const auto ranks = episode_ranks(lex, episodes, index, exec);
  return metrics_from_ranks(ranks);
}

}  // namespace wac::kernels
