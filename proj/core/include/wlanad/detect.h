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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlanad/features.h"
#include "wlanad/gmm.h"
#include "wlanad/hmm.h"

namespace wlanad {

enum SlotFlag : unsigned {
  kGmmOutlier = 1u << 0,
  kHmmLowLoglik = 1u << 1,
  kRareTransition = 1u << 2,
};

struct SlotVerdict {
  std::int64_t slot_start = 0;
  std::optional<double> gmm_max_responsibility;
  std::optional<double> hmm_step_loglik;
  std::optional<double> mahalanobis;
  std::optional<int> assigned_state;
  unsigned flags = 0;

  bool has(SlotFlag flag) const { return (flags & flag) != 0; }
};

struct DayVerdict {
  std::int64_t window_start = 0;
  std::optional<double> gmm_total;
  std::optional<double> hmm_total;
  std::optional<bool> gmm_abnormal;
  std::optional<bool> hmm_abnormal;
  std::vector<SlotVerdict> slots;
  std::vector<TransitionFlag> transitions;
};

enum class ModelKind { kGmm, kHmm };

std::string_view to_string(ModelKind kind);

// Flags slots whose largest posterior responsibility is below threshold.
// Throws FingerprintMismatch when the series was projected by a different
// pipeline than the model was trained under.
DayVerdict score_day_gmm(const GmmModel& model, const FeatureSeries& series,
                         double threshold,
                         std::optional<double> day_threshold = std::nullopt);

// Flags slots whose forward log-likelihood increment is below step_threshold.
// With diagnostics, attaches Viterbi states, Mahalanobis distances and
// rare-transition flags.
DayVerdict score_day_hmm(const HmmModel& model, const FeatureSeries& series,
                         double step_threshold, bool diagnostics,
                         std::optional<double> day_threshold = std::nullopt,
                         const RarityOptions& rarity = {});

// Combines a GMM and an HMM verdict over the same slot grid.
DayVerdict merge_verdicts(const DayVerdict& gmm, const DayVerdict& hmm);

// Recomputes one model's flags and day verdict from the stored scores.
void apply_threshold(DayVerdict& day, ModelKind kind, double threshold,
                     std::optional<double> day_threshold = std::nullopt);

void check_fingerprint(const std::string& model_fingerprint,
                       const FeatureSeries& series);

// Total log-likelihood of the listed days under each model.
struct ComparisonTable {
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<double>> values;  // rows x columns

  std::string to_markdown() const;
  std::string to_csv() const;
};

struct NamedDataset {
  std::string name;
  std::vector<FeatureSeries> days;
};

// Rows: "The same train data" followed by one "Test data from <name>" row
// per test set. Columns: GMM, HMM.
ComparisonTable compare_models(const GmmModel& gmm, const HmmModel& hmm,
                               std::span<const FeatureSeries> train_days,
                               std::span<const NamedDataset> test_sets);

std::string flags_to_string(unsigned flags);
std::string verdicts_to_json(std::span<const DayVerdict> days);
std::vector<DayVerdict> verdicts_from_json(std::string_view text);
void write_slot_csv(std::ostream& out, std::span<const DayVerdict> days);

}  // namespace wlanad
