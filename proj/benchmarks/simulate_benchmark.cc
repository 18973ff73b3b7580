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

#include "benchmark/benchmark.h"
#include "wlanad/features.h"
#include "wlanad/ingest.h"
#include "wlanad/simulate.h"

namespace wlanad {
namespace {

void BM_GenerateDay(benchmark::State& state) {
  const auto profile = PopulationProfile::testbed();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto day = generate_day(profile, 1446422400, {}, ++seed);
    benchmark::DoNotOptimize(day.records.data());
  }
}
BENCHMARK(BM_GenerateDay);

void BM_SessionizeAndAggregate(benchmark::State& state) {
  const auto day = generate_day(PopulationProfile::testbed(), 1446422400, {}, 5);
  for (auto _ : state) {
    const auto s = sessionize(day.records);
    auto f = aggregate(s.sessions, day.ap, day.window_start, day.window_end);
    benchmark::DoNotOptimize(f.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(day.records.size()));
}
BENCHMARK(BM_SessionizeAndAggregate);

}  // namespace
}  // namespace wlanad
