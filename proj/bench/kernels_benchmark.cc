// Copyright 2026 The RideGym Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP kernels.
//   ./kernels_benchmark --benchmark_filter=RowMinima
//   OMP_NUM_THREADS=8 ./kernels_benchmark

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "ridegym/kernels.h"

namespace ridegym::kernels {
namespace {

struct RowData {
  std::vector<double> z, g, coupons, scores;
  std::vector<int> argmin;
};

RowData MakeRows(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RowData d;
  d.coupons = {0.0, 0.05, 0.1, 0.15, 0.2};
  d.z.resize(static_cast<size_t>(n) * d.coupons.size());
  d.g.resize(n);
  for (double& v : d.z) v = unit(rng);
  for (double& v : d.g) v = 2.0 + 30.0 * unit(rng);
  d.scores.resize(n);
  d.argmin.resize(n);
  return d;
}

template <auto Kernel>
void BM_RowMinima(benchmark::State& state) {
  RowData d = MakeRows(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Kernel(d.z, d.g, d.coupons, 0.05, 0.7, d.scores, d.argmin);
    benchmark::DoNotOptimize(d.scores.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_NearestCentroid(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int dim = 4, k = 16;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> points(static_cast<size_t>(n) * dim), centroids(k * dim);
  for (double& v : points) v = normal(rng);
  for (double& v : centroids) v = normal(rng);
  std::vector<int> labels(n);
  std::vector<double> dist2(n);
  for (auto _ : state) {
    Kernel(points, dim, centroids, labels, dist2);
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(BM_RowMinima<RowMinimaSerial>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_RowMinima<RowMinimaParallel>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_NearestCentroid<NearestCentroidSerial>)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_NearestCentroid<NearestCentroidParallel>)->Range(1 << 10, 1 << 20);

}  // namespace
}  // namespace ridegym::kernels

BENCHMARK_MAIN();
