// Copyright 2026 The wlanad Authors
//
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

#include <random>

#include "benchmark/benchmark.h"
#include "wlanad/gmm.h"

namespace wlanad {
namespace {

Matrix blobs(int n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Matrix x(n, 3);
  for (int i = 0; i < n; ++i) {
    const double c = (i % 3) * 4.0 - 4.0;
    for (int k = 0; k < 3; ++k) x(i, k) = c + z(rng);
  }
  return x;
}

void BM_FitEm(benchmark::State& state) {
  const Matrix x = blobs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto fit = fit_em(x, 3, 11);
    benchmark::DoNotOptimize(fit.trace.data());
  }
}
BENCHMARK(BM_FitEm)->Arg(400)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_MaxResponsibility(benchmark::State& state) {
  const Matrix x = blobs(1000);
  const GmmScorer scorer(fit_em(x, 3, 11).model);
  for (auto _ : state) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) acc += scorer.max_responsibility(x.row(i).transpose());
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * x.rows());
}
BENCHMARK(BM_MaxResponsibility);

}  // namespace
}  // namespace wlanad
