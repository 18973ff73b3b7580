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
#include <vector>

#include "benchmark/benchmark.h"
#include "wlanad/hmm.h"

namespace wlanad {
namespace {

// 3 states in 3-D, the shape the detector runs on.
HmmModel model() {
  HmmModel m;
  m.initial = Vector::Constant(3, 1.0 / 3);
  m.transition.resize(3, 3);
  m.transition << 0.8, 0.15, 0.05, 0.1, 0.8, 0.1, 0.05, 0.15, 0.8;
  m.means = {Eigen::Vector3d(-3, 0, 0), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(3, 0, 1)};
  m.covariances.assign(3, Matrix::Identity(3, 3));
  return m;
}

void BM_Forward(benchmark::State& state) {
  const HmmModel m = model();
  const Matrix obs = generate(m, static_cast<int>(state.range(0)), 1).observations;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_loglik(m, obs).total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(40)->Arg(96)->Arg(1000);

void BM_Viterbi(benchmark::State& state) {
  const HmmModel m = model();
  const Matrix obs = generate(m, static_cast<int>(state.range(0)), 2).observations;
  for (auto _ : state) {
    auto r = viterbi(m, obs);
    benchmark::DoNotOptimize(r.path.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(40)->Arg(1000);

void BM_BaumWelch(benchmark::State& state) {
  const HmmModel m = model();
  std::vector<Matrix> days;
  for (int d = 0; d < state.range(0); ++d) {
    days.push_back(generate(m, 40, 100 + static_cast<std::uint64_t>(d)).observations);
  }
  for (auto _ : state) {
    auto fit = baum_welch(days, 7);
    benchmark::DoNotOptimize(fit.trace.data());
  }
}
BENCHMARK(BM_BaumWelch)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace wlanad
