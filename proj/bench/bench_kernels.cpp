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

// Serial reference kernels against their OpenMP counterparts.
//   ./bench_kernels --benchmark_filter=FitWords

#include <benchmark/benchmark.h>

#include <random>

#include "wac/datagen.hpp"
#include "wac/embedding.hpp"
#include "wac/kernels.hpp"

namespace {

using wac::kernels::Exec;

const wac::Dataset& training_data() {
  static const wac::Dataset data = [] {
    wac::GenerateOptions opt;
    opt.n_scenes = 500;
    opt.episodes_per_scene = 0;
    return wac::generate(wac::GenerativeSpec::color_shape(7), opt);
  }();
  return data;
}

const wac::Lexicon& trained_lexicon() {
  static const wac::Lexicon lex = [] {
    wac::Lexicon l(training_data().dim);
    wac::kernels::train_words(l, wac::build_training_sets(training_data(), 3.0, 7),
                              Exec::Parallel);
    return l;
  }();
  return lex;
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
}

void BM_FitWords(benchmark::State& state) {
  const auto sets = wac::build_training_sets(training_data(), 3.0, 7);
  for (auto _ : state) {
    auto out = wac::kernels::fit_words(sets, training_data().dim, wac::TrainConfig{}, exec_of(state));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sets.size()));
}
BENCHMARK(BM_FitWords)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_DenotationMatrix(benchmark::State& state) {
  std::vector<wac::FeatureVector> objects;
  for (const auto& s : training_data().scenes) {
    for (const auto& o : s.objects) objects.push_back(o.features);
  }
  const auto& lex = trained_lexicon();
  for (auto _ : state) {
    auto out = wac::kernels::denotation_matrix(lex, objects, exec_of(state));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(objects.size()));
}
BENCHMARK(BM_DenotationMatrix)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);

void BM_WeightedRowSum(benchmark::State& state) {
  const std::size_t n = 4096, cols = 256;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n), v(n * cols);
  for (auto& x : w) x = u(rng);
  for (auto& x : v) x = u(rng);
  for (auto _ : state) {
    auto out = wac::kernels::weighted_row_sum(w, v, cols, exec_of(state));
    benchmark::DoNotOptimize(out);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(v.size() * sizeof(double)));
}
BENCHMARK(BM_WeightedRowSum)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);

void BM_Evaluate(benchmark::State& state) {
  wac::GenerateOptions opt;
  opt.n_scenes = 2000;
  const auto test = wac::generate(wac::GenerativeSpec::color_shape(1234), opt);
  const auto& lex = trained_lexicon();
  for (auto _ : state) {
    auto m = wac::kernels::evaluate(lex, test.episodes, test.scenes, exec_of(state));
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(test.episodes.size()));
}
BENCHMARK(BM_Evaluate)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
