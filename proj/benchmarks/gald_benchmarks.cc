/*
 * Copyright 2026 The GALDetector Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Microbenchmarks for the hot paths: the 1-D sparsity split, tree and forest
// construction, forest scoring, detector training and AUC.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "gald/dataset.h"
#include "gald/detector.h"
#include "gald/eval.h"
#include "gald/normal_model.h"
#include "gald/parallel.h"
#include "gald/random.h"
#include "gald/sparsity_forest.h"

namespace gald {
namespace {

Matrix UnitCube(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = UniformUnit(rng);
  }
  return m;
}

void BM_BestSplit1D(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  std::vector<double> positions(n);
  for (double& v : positions) v = UniformUnit(rng);
  std::sort(positions.begin(), positions.end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(BestSplit1D(positions, Interval{}, p));
  }
}
BENCHMARK(BM_BestSplit1D)->ArgsProduct({{50, 200, 1000}, {2, 5}});

void BM_SparsityTreeBuild(benchmark::State& state) {
  const Matrix sample =
      UnitCube(static_cast<std::size_t>(state.range(0)),
               static_cast<std::size_t>(state.range(1)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SparsityTree::Build(sample, 5, 10));
  }
}
BENCHMARK(BM_SparsityTreeBuild)->ArgsProduct({{200}, {6, 36, 166}});

void BM_SparsityForestScore(benchmark::State& state) {
  SetNumThreads(1);
  const Matrix data = UnitCube(5000, 6, 3);
  const SparsityForest forest = SparsityForest::Fit(data, ForestConfig{}, 4);
  std::vector<std::size_t> rows(data.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forest.ScoreRows(data, rows));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(rows.size()));
}
BENCHMARK(BM_SparsityForestScore);

void BM_FitKMeans(benchmark::State& state) {
  const Matrix data = UnitCube(static_cast<std::size_t>(state.range(0)), 6, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitKMeans(data, KMeansOptions{}, 6));
  }
}
BENCHMARK(BM_FitKMeans)->Arg(1000)->Arg(10000);

void BM_TrainDetector(benchmark::State& state) {
  SetNumThreads(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix features = UnitCube(n, 6, 7);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = features(i, 0) + features(i, 1) > 1.5 ? 1 : 0;
  }
  DetectorParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainDetector(features, labels, params, 8));
  }
}
BENCHMARK(BM_TrainDetector)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(9);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = UniformUnit(rng);
    labels[i] = i % 10 == 0 ? 1 : 0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(Auc(scores, labels));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Auc)->Range(1 << 10, 1 << 18)->Complexity(benchmark::oNLogN);

}  // namespace
}  // namespace gald

BENCHMARK_MAIN();
