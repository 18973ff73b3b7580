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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlanad/detect.h"
#include "wlanad/simulate.h"

namespace wlanad {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& other);
  friend bool operator==(const ConfusionCounts&,
                         const ConfusionCounts&) = default;
};

// Ratios with a zero denominator are absent.
struct MetricSet {
  std::optional<double> fpr;
  std::optional<double> tnr;
  std::optional<double> tpr;
  std::optional<double> accuracy;
  std::optional<double> f1;
};

bool flagged_by(const SlotVerdict& slot, ModelKind source);

// Joins per-slot flags with labels. Throws std::invalid_argument when the
// slot grids differ.
ConfusionCounts confusion(std::span<const DayVerdict> verdicts,
                          std::span<const GroundTruth> truth,
                          ModelKind source);
ConfusionCounts confusion(const DayVerdict& verdict, const GroundTruth& truth,
                          ModelKind source);

// Throws std::invalid_argument for an empty count set.
MetricSet metrics(const ConfusionCounts& counts);

struct PatternRate {
  ScenarioKind kind = ScenarioKind::kApShutdown;
  std::int64_t detected = 0;
  std::int64_t total = 0;
};

// "71.4% (10/14)": the percentage truncated to one decimal, integers bare.
std::string format_rate(std::int64_t detected, std::int64_t total);
std::string format_percent(std::optional<double> fraction);

std::vector<PatternRate> per_pattern_rates(std::span<const DayVerdict> verdicts,
                                           std::span<const GroundTruth> truth,
                                           ModelKind source);

// One row of a threshold table.
struct ThresholdRow {
  std::string label;
  double threshold = 0.0;
  ConfusionCounts counts;
  MetricSet metrics;
};

// Re-thresholds copies of the verdicts at every threshold.
std::vector<ThresholdRow> threshold_sweep(std::span<const DayVerdict> verdicts,
                                          std::span<const GroundTruth> truth,
                                          ModelKind source,
                                          std::span<const double> thresholds,
                                          const std::string& label);

// Rows = threshold rows, columns = FPR, TNR, TPR, ACC, F1.
std::string threshold_table_markdown(std::span<const ThresholdRow> rows);
std::string threshold_table_csv(std::span<const ThresholdRow> rows);

// Rows = models, columns = anomaly kinds.
struct PatternTableRow {
  std::string model;
  std::vector<PatternRate> rates;
};
std::string pattern_table_markdown(std::span<const PatternTableRow> rows);
std::string pattern_table_csv(std::span<const PatternTableRow> rows);

// Best accuracy reachable by a single day-likelihood cutoff (days with a
// total below the cutoff are called abnormal).
struct DaySeparation {
  double threshold = 0.0;
  double accuracy = 0.0;
};
DaySeparation best_day_threshold(std::span<const double> totals,
                                 const std::vector<bool>& abnormal);

}  // namespace wlanad
