/*
 *  Copyright 2026 The hetcal Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

// Serial reference path vs OpenMP path for the data-parallel kernels. Arg 0
// is serial, arg 1 parallel.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "hetcal/metrics.hpp"
#include "hetcal/parallel.hpp"
#include "hetcal/partitioner.hpp"
#include "hetcal/pipeline.hpp"
#include "hetcal/synth.hpp"
#include "hetcal/verify.hpp"

namespace {

using namespace hetcal;

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

const Dataset& toy() {
  static const Dataset data = [] {
    ToyModelSpec spec;
    spec.weights = {1.8, 0.9};
    spec.bias = -0.9;
    spec.noise_features = 6;
    return gen_heterogeneous(50000, spec, 1);
  }();
  return data;
}

void BM_PairCountAuc(benchmark::State& state) {
  const auto data = gen_heterogeneous(4000, 1.8, -0.9, 2);
  const auto s = data.scores();
  const auto y = data.labels();
  for (auto _ : state) benchmark::DoNotOptimize(pair_count_auc(s, y, exec_of(state)));
}
BENCHMARK(BM_PairCountAuc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FindBestSplit(benchmark::State& state) {
  const auto& data = toy();
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<std::size_t> features(data.arity());
  std::iota(features.begin(), features.end(), std::size_t{0});
  TreeConfig cfg;
  cfg.min_samples_leaf = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_best_split(data, rows, features, cfg, exec_of(state)));
  }
}
BENCHMARK(BM_FindBestSplit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  const auto& data = toy();
  HetCalConfig cfg;
  cfg.tree.min_samples_leaf = 500;
  cfg.forest_size = 8;
  static const auto hc = fit(data, data, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(hc.predict_batch(data, exec_of(state)));
}
BENCHMARK(BM_PredictBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  VerifyOptions opt;
  opt.trials = 200;
  opt.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_verify(opt).passed());
}
BENCHMARK(BM_Verify)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
