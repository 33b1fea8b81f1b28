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

#include "wac/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "wac/error.hpp"

namespace wac {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail(ErrorKind::InvalidArgument, "learning_rate must be > 0");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda))
    fail(ErrorKind::InvalidArgument, "l2_lambda must be >= 0");
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "tol must be > 0");
  if (!(neg_ratio > 0.0) || !std::isfinite(neg_ratio))
    fail(ErrorKind::InvalidArgument, "neg_ratio must be > 0");
  if (cache_cap == 0) fail(ErrorKind::InvalidArgument, "cache_cap must be >= 1");
  if (!(prob_clamp_eps > 0.0) || !(prob_clamp_eps < 0.5))
    fail(ErrorKind::InvalidArgument, "prob_clamp_eps must be in (0, 0.5)");
}

namespace {

constexpr double kMinProb = std::numeric_limits<double>::min();
const double kMaxProb = std::nextafter(1.0, 0.0);

double raw_sigmoid(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot_bias(std::span<const double> params, std::span<const double> x) {
  const std::size_t d = x.size();
  double z = params[d];
  for (std::size_t j = 0; j < d; ++j) z += params[j] * x[j];
  return z;
}

}  // namespace

double sigmoid(double z) noexcept {
  return std::clamp(raw_sigmoid(z), kMinProb, kMaxProb);
}

void check_features(std::span<const double> x, std::size_t dim,
                    std::string_view what) {
  if (x.size() != dim) {
    fail(ErrorKind::Dimension, std::string(what) + ": expected dimension " +
                                   std::to_string(dim) + ", got " +
                                   std::to_string(x.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      fail(ErrorKind::NonFinite, std::string(what) + "[" + std::to_string(j) +
                                     "] is not finite");
    }
  }
}

double fit_probability(const WordClassifier& classifier, std::span<const double> x) {
  check_features(x, classifier.weights.size(), "features for '" + classifier.word + "'");
  double z = classifier.bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += classifier.weights[j] * x[j];
  return sigmoid(z);
}

LossGrad loss_and_grad(std::span<const double> params,
                       std::span<const Example> examples, double l2_lambda,
                       double clamp_eps) {
  if (examples.empty()) fail(ErrorKind::InvalidArgument, "loss_and_grad: no examples");
  if (params.empty()) fail(ErrorKind::InvalidArgument, "loss_and_grad: no parameters");
  const std::size_t d = params.size() - 1;
  const double hi = 1.0 - clamp_eps;

  LossGrad out;
  out.grad.assign(d + 1, 0.0);
  double data_loss = 0.0;
  for (const auto& ex : examples) {
    if (ex.features.size() != d) {
      fail(ErrorKind::Dimension, "loss_and_grad: example dimension " +
                                     std::to_string(ex.features.size()) +
                                     " != " + std::to_string(d));
    }
    const double z = dot_bias(params, ex.features);
    // p(y=1) and p(y=0) from separate branches so neither loses precision
    // when the other is close to one.
    const double p1 = raw_sigmoid(z);
    const double p0 = raw_sigmoid(-z);
    double residual;  // p(y=1) - y
    if (ex.positive) {
      data_loss -= std::log(std::clamp(p1, clamp_eps, hi));
      residual = -p0;
    } else {
      data_loss -= std::log(std::clamp(p0, clamp_eps, hi));
      residual = p1;
    }
    for (std::size_t j = 0; j < d; ++j) out.grad[j] += residual * ex.features[j];
    out.grad[d] += residual;
  }
  const double n = static_cast<double>(examples.size());
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad[j] = out.grad[j] / n + l2_lambda * params[j];
    reg += params[j] * params[j];
  }
  out.grad[d] /= n;
  out.loss = data_loss / n + 0.5 * l2_lambda * reg;
  return out;
}

FitResult fit_logistic(std::span<const Example> examples,
                       std::vector<double> init, const TrainConfig& config) {
  FitResult result;
  result.params = std::move(init);
  auto lg = loss_and_grad(result.params, examples, config.l2_lambda,
                          config.prob_clamp_eps);
  result.loss_trace.push_back(lg.loss);
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t j = 0; j < result.params.size(); ++j) {
      result.params[j] -= config.learning_rate * lg.grad[j];
    }
    lg = loss_and_grad(result.params, examples, config.l2_lambda,
                       config.prob_clamp_eps);
    result.loss_trace.push_back(lg.loss);
    ++result.epochs;
    const double prev = result.loss_trace[result.loss_trace.size() - 2];
    if (std::abs(prev - lg.loss) < config.tol) break;
  }
  for (double p : result.params) {
    if (!std::isfinite(p)) {
      fail(ErrorKind::Internal, "gradient descent diverged; lower learning_rate");
    }
  }
  return result;
}

std::vector<Example> make_examples(std::span<const FeatureVector> pos,
                                   std::span<const FeatureVector> neg) {
  std::vector<Example> examples;
  examples.reserve(pos.size() + neg.size());
  for (const auto& x : pos) examples.push_back({x, true});
  for (const auto& x : neg) examples.push_back({x, false});
  return examples;
}

namespace {

void check_list(std::span<const FeatureVector> xs, std::size_t dim,
                const char* name) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_features(xs[i], dim, std::string(name) + "[" + std::to_string(i) + "]");
  }
}

WordClassifier classifier_from(std::string_view word, const FitResult& fit) {
  WordClassifier c;
  c.word = std::string(word);
  c.weights.assign(fit.params.begin(), fit.params.end() - 1);
  c.bias = fit.params.back();
  return c;
}

}  // namespace

TrainOutcome fit_word(std::string_view word, std::span<const FeatureVector> pos,
                      std::span<const FeatureVector> neg, std::size_t dim,
                      const TrainConfig& config) {
  if (pos.empty()) {
    fail(ErrorKind::InvalidArgument,
         "train_word('" + std::string(word) + "'): no positive examples");
  }
  check_list(pos, dim, "pos");
  check_list(neg, dim, "neg");
  const auto examples = make_examples(pos, neg);
  auto fit = fit_logistic(examples, std::vector<double>(dim + 1, 0.0), config);
  TrainOutcome out;
  out.classifier = classifier_from(word, fit);
  out.classifier.n_pos = pos.size();
  out.classifier.n_neg = neg.size();
  out.loss_trace = std::move(fit.loss_trace);
  return out;
}

Lexicon::Lexicon(std::size_t dim, TrainConfig config)
    : dim_(dim), config_(config) {
  if (dim == 0) fail(ErrorKind::InvalidArgument, "invalid dimension 0");
  config_.validate();
}

bool Lexicon::contains(std::string_view word) const {
  return find(word) != nullptr;
}

const WordClassifier* Lexicon::find(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  return it == entries_.end() ? nullptr : &it->second;
}

const WordClassifier& Lexicon::at(std::string_view word) const {
  const auto* c = find(word);
  if (c == nullptr) fail(ErrorKind::NotFound, "unknown word '" + std::string(word) + "'");
  return *c;
}

const ExampleCache* Lexicon::cache(std::string_view word) const {
  auto it = caches_.find(std::string(word));
  return it == caches_.end() ? nullptr : &it->second;
}

WordClassifier& Lexicon::slot(std::string_view word) {
  std::string key(word);
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  WordClassifier fresh;
  fresh.word = key;
  fresh.weights.assign(dim_, 0.0);
  order_.push_back(key);
  return entries_.emplace(key, std::move(fresh)).first->second;
}

void Lexicon::append_cache(const std::string& word,
                           std::span<const FeatureVector> pos,
                           std::span<const FeatureVector> neg) {
  auto& cache = caches_[word];
  auto push = [this](std::deque<FeatureVector>& q, std::span<const FeatureVector> xs) {
    for (const auto& x : xs) {
      q.push_back(x);
      if (q.size() > config_.cache_cap) q.pop_front();
    }
  };
  push(cache.pos, pos);
  push(cache.neg, neg);
}

void Lexicon::check_training_set(std::span<const FeatureVector> pos,
                                 std::span<const FeatureVector> neg) const {
  check_list(pos, dim_, "pos");
  check_list(neg, dim_, "neg");
}

void Lexicon::commit_trained(WordClassifier fitted,
                             std::span<const FeatureVector> pos,
                             std::span<const FeatureVector> neg) {
  if (fitted.weights.size() != dim_) {
    fail(ErrorKind::Dimension, "commit_trained: classifier dimension mismatch");
  }
  auto& target = slot(fitted.word);
  fitted.update_count = target.update_count + 1;
  const std::string word = fitted.word;
  target = std::move(fitted);
  append_cache(word, pos, neg);
}

TrainOutcome Lexicon::train_word(std::string_view word,
                                 std::span<const FeatureVector> pos,
                                 std::span<const FeatureVector> neg) {
  auto out = fit_word(word, pos, neg, dim_, config_);
  commit_trained(out.classifier, pos, neg);
  out.classifier = at(word);
  return out;
}

TrainOutcome Lexicon::update_word(std::string_view word,
                                  std::span<const FeatureVector> new_pos,
                                  std::span<const FeatureVector> new_neg) {
  check_list(new_pos, dim_, "new_pos");
  check_list(new_neg, dim_, "new_neg");
  auto& target = slot(word);
  TrainOutcome out;
  if (new_pos.empty() && new_neg.empty()) {
    ++target.update_count;
    out.classifier = target;
    return out;
  }
  append_cache(target.word, new_pos, new_neg);
  const auto& cache = caches_.at(target.word);
  std::vector<Example> examples;
  examples.reserve(cache.pos.size() + cache.neg.size());
  for (const auto& x : cache.pos) examples.push_back({x, true});
  for (const auto& x : cache.neg) examples.push_back({x, false});

  std::vector<double> init(target.weights);
  init.push_back(target.bias);
  auto fit = fit_logistic(examples, std::move(init), config_);
  target.weights.assign(fit.params.begin(), fit.params.end() - 1);
  target.bias = fit.params.back();
  target.n_pos = cache.pos.size();
  target.n_neg = cache.neg.size();
  ++target.update_count;
  out.classifier = target;
  out.loss_trace = std::move(fit.loss_trace);
  return out;
}

void Lexicon::insert(WordClassifier classifier) {
  if (classifier.weights.size() != dim_) {
    fail(ErrorKind::Dimension, "classifier '" + classifier.word + "' has dimension " +
                                   std::to_string(classifier.weights.size()) +
                                   ", lexicon has " + std::to_string(dim_));
  }
  check_features(classifier.weights, dim_, "weights of '" + classifier.word + "'");
  if (!std::isfinite(classifier.bias)) {
    fail(ErrorKind::NonFinite, "bias of '" + classifier.word + "' is not finite");
  }
  auto& target = slot(classifier.word);
  target = std::move(classifier);
}

void Lexicon::set_vocab_order(std::vector<std::string> order) {
  std::unordered_set<std::string> seen;
  for (const auto& w : order) {
    if (!entries_.count(w) || !seen.insert(w).second) {
      fail(ErrorKind::InvalidArgument, "vocab order is not a permutation of the vocabulary");
    }
  }
  if (seen.size() != entries_.size()) {
    fail(ErrorKind::InvalidArgument, "vocab order is not a permutation of the vocabulary");
  }
  order_ = std::move(order);
}

bool Lexicon::operator==(const Lexicon& other) const {
  if (dim_ != other.dim_ || !(config_ == other.config_) || order_ != other.order_) {
    return false;
  }
  for (const auto& w : order_) {
    if (!(entries_.at(w) == other.entries_.at(w))) return false;
  }
  return true;
}

}  // namespace wac
