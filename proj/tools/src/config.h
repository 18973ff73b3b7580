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
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wlanad/features.h"
#include "wlanad/hmm.h"

namespace wlanad::cli {

// Every knob of the end-to-end pipeline. JSON on disk, flags override.
struct PipelineConfig {
  std::int64_t utc_offset_seconds = 0;
  bool working_hours = false;
  int working_hours_start = 8;
  int working_hours_end = 18;
  int pca_components = 3;
  int gmm_components = 3;
  int gmm_max_iter = 100;
  double gmm_tol = 1e-6;
  int hmm_states = 3;
  int hmm_max_iter = 20;
  double hmm_tol = 1e-6;
  std::string hmm_init = "random";
  std::uint64_t seed = 1;
  double gmm_threshold = 0.6;
  double hmm_threshold = -10.0;
  std::optional<double> gmm_day_threshold;
  std::optional<double> hmm_day_threshold;
  int train_normal_days = 10;
  std::vector<double> gmm_sweep{0.6, 0.7, 0.8};
  std::vector<double> hmm_sweep{-50.0, -20.0, -10.0};

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  AggregateOptions aggregate_options() const;
  HmmInit init() const;

  std::string to_json() const;
  // Unknown fields are rejected.
  static PipelineConfig from_json(std::string_view text);
  static PipelineConfig load(const std::string& path);
};

// Seeds for the training-day draw and the two fits, all drawn from the one
// command seed.
struct FitSeeds {
  std::uint64_t gmm = 0;
  std::uint64_t hmm = 0;
  std::uint64_t split = 0;
};
FitSeeds derive_seeds(std::uint64_t seed);

}  // namespace wlanad::cli
