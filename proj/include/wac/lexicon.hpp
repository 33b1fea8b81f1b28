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
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wac {

/// Perceptual features of one object. Length must equal the owning
/// lexicon's dimension and every entry must be finite.
using FeatureVector = std::vector<double>;

struct TrainConfig {
  double learning_rate = 0.1;
  double l2_lambda = 0.01;
  std::size_t max_epochs = 500;
  double tol = 1e-6;             // absolute loss delta between epochs
  double neg_ratio = 3.0;        // negatives sampled per positive
  std::size_t cache_cap = 1000;  // per word, per polarity
  double prob_clamp_eps = 1e-12;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// One word's logistic classifier. Applying it gives the word's fit
/// probability for an object; its weights double as the word's visual
/// embedding.
struct WordClassifier {
  std::string word;
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t update_count = 0;

  bool operator==(const WordClassifier&) const = default;
};

/// Logistic function evaluated without overflow. The result is clamped into
/// the open interval (0, 1) so saturated inputs never produce 0 or 1.
double sigmoid(double z) noexcept;

/// Fit probability sigmoid(weights . x + bias).
double fit_probability(const WordClassifier& classifier, std::span<const double> x);

/// Throws Dimension on a length mismatch and NonFinite on NaN/Inf.
void check_features(std::span<const double> x, std::size_t dim,
                    std::string_view what);

struct Example {
  std::span<const double> features;
  bool positive;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d weights..., d bias (last)
};

/// Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps],
/// plus (l2_lambda / 2) |weights|^2. The bias (last parameter) is not
/// regularized. Throws InvalidArgument on an empty example list.
LossGrad loss_and_grad(std::span<const double> params,
                       std::span<const Example> examples, double l2_lambda,
                       double clamp_eps);

struct FitResult {
  std::vector<double> params;      // weights..., bias
  std::vector<double> loss_trace;  // loss at the start and after each epoch
  std::size_t epochs = 0;
};

/// Full-batch gradient descent from init. Stops after max_epochs or when
/// the loss changes by less than tol between consecutive epochs.
FitResult fit_logistic(std::span<const Example> examples,
                       std::vector<double> init, const TrainConfig& config);

/// Positive and negative examples for one word; unit of (parallel) training.
struct TrainingSet {
  std::string word;
  std::vector<FeatureVector> pos;
  std::vector<FeatureVector> neg;
};

struct TrainOutcome {
  WordClassifier classifier;
  std::vector<double> loss_trace;
};

struct ExampleCache {
  std::deque<FeatureVector> pos;
  std::deque<FeatureVector> neg;
};

/// Vocabulary of word classifiers sharing one feature dimension.
///
/// Reads are safe to run concurrently; any mutation requires exclusive
/// access (single writer). Equality compares the persisted state only:
/// dimension, config, vocabulary order and classifier parameters. Example
/// caches are runtime state and are not compared or saved.
class Lexicon {
 public:
  explicit Lexicon(std::size_t dim, TrainConfig config = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const TrainConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& vocab_order() const noexcept { return order_; }

  bool contains(std::string_view word) const;
  const WordClassifier* find(std::string_view word) const;
  const WordClassifier& at(std::string_view word) const;
  const ExampleCache* cache(std::string_view word) const;

  /// Trains from zero on exactly these examples and replaces any previous
  /// classifier for the word. The examples are appended to the cache.
  TrainOutcome train_word(std::string_view word, std::span<const FeatureVector> pos,
                          std::span<const FeatureVector> neg);

  /// Fast-mapping update: caches the new examples and continues descent
  /// from the current parameters over the whole cache. With no new
  /// examples only update_count changes.
  TrainOutcome update_word(std::string_view word,
                           std::span<const FeatureVector> new_pos,
                           std::span<const FeatureVector> new_neg);

  /// Validates a training set against this lexicon; throws as train_word.
  void check_training_set(std::span<const FeatureVector> pos,
                          std::span<const FeatureVector> neg) const;

  /// Stores a classifier fitted elsewhere (e.g. by a parallel kernel) as if
  /// train_word had produced it from these examples.
  void commit_trained(WordClassifier fitted, std::span<const FeatureVector> pos,
                      std::span<const FeatureVector> neg);

  /// Inserts or replaces a classifier verbatim (loading from disk).
  void insert(WordClassifier classifier);

  /// Reorders the vocabulary; order must be a permutation of the words.
  void set_vocab_order(std::vector<std::string> order);

  bool operator==(const Lexicon& other) const;

 private:
  WordClassifier& slot(std::string_view word);
  void append_cache(const std::string& word, std::span<const FeatureVector> pos,
                    std::span<const FeatureVector> neg);

  std::size_t dim_;
  TrainConfig config_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, WordClassifier> entries_;
  std::unordered_map<std::string, ExampleCache> caches_;
};

/// Builds the labeled example list (positives first, then negatives).
std::vector<Example> make_examples(std::span<const FeatureVector> pos,
                                   std::span<const FeatureVector> neg);

/// Pure training step used by Lexicon::train_word and the parallel kernels.
TrainOutcome fit_word(std::string_view word, std::span<const FeatureVector> pos,
                      std::span<const FeatureVector> neg, std::size_t dim,
                      const TrainConfig& config);

}  // namespace wac
