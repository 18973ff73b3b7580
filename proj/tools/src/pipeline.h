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

#include <span>
#include <string>
#include <vector>

#include "config.h"
#include "wlanad/detect.h"
#include "wlanad/eval.h"
#include "wlanad/features.h"
#include "wlanad/gmm.h"
#include "wlanad/hmm.h"
#include "wlanad/simulate.h"

namespace wlanad::cli {

// Aggregated slots of one trace over [window_start, window_end). Without the
// working-hours filter, absent slots are materialized as zeros.
std::vector<SlotFeatures> featurize(std::span<const Session> sessions, const std::string& ap,
                                    std::int64_t window_start, std::int64_t window_end,
                                    const PipelineConfig& config);

// The slot-aligned span covering every session at ap.
std::pair<std::int64_t, std::int64_t> session_window(std::span<const Session> sessions,
                                                     const std::string& ap);

// Groups slots by (ap, local date) and fills gaps inside each group.
std::vector<std::vector<SlotFeatures>> split_days(std::span<const SlotFeatures> slots,
                                                  std::int64_t utc_offset_seconds);

struct TrainedModels {
  FeaturePipeline pipeline;
  GmmFit gmm;
  HmmFit hmm;
};

FeaturePipeline fit_pipeline(std::span<const std::vector<SlotFeatures>> days,
                             const PipelineConfig& config);
GmmFit train_gmm(const FeaturePipeline& pipeline,
                 std::span<const std::vector<SlotFeatures>> days, const PipelineConfig& config);
HmmFit train_hmm(const FeaturePipeline& pipeline,
                 std::span<const std::vector<SlotFeatures>> days, const PipelineConfig& config);
TrainedModels train_models(std::span<const std::vector<SlotFeatures>> days,
                           const PipelineConfig& config);

// Both models on one day, merged, at the configured thresholds.
DayVerdict score_day(const TrainedModels& models, const FeatureSeries& series,
                     const PipelineConfig& config);

// One simulated or recorded day with its ground truth.
struct LabeledDay {
  std::string name;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  bool abnormal = false;
  std::vector<AccountingRecord> records;
  GroundTruth truth;
};

std::vector<LabeledDay> labeled_days(const Corpus& corpus);
// Reads manifest.json and the trace files next to it.
std::vector<LabeledDay> load_corpus_dir(const std::string& directory, std::string* ap);

struct TestbedReport {
  PipelineConfig config;
  TrainedModels models;
  std::size_t sessionize_issues = 0;
  std::vector<std::string> train_names;
  std::vector<std::string> test_names;
  std::vector<bool> test_abnormal;
  std::vector<DayVerdict> verdicts;  // test days, configured thresholds
  std::vector<GroundTruth> truth;

  // Table 5 / 6 layout: normal and anomalous test sets per threshold.
  std::vector<ThresholdRow> gmm_table;
  std::vector<ThresholdRow> hmm_table;
  // Sweeps over every test slot, used for the best-F1 comparison.
  std::vector<ThresholdRow> gmm_sweep;
  std::vector<ThresholdRow> hmm_sweep;
  ThresholdRow gmm_best;
  ThresholdRow hmm_best;

  MetricSet hmm_default_normal;     // normal test days
  MetricSet hmm_default_anomalous;  // abnormal test days
  MetricSet gmm_default_normal;
  MetricSet gmm_default_anomalous;

  double gmm_pattern_threshold = 0.0;
  double hmm_pattern_threshold = 0.0;
  std::vector<PatternTableRow> patterns;  // Table 7 layout
  std::vector<double> gmm_day_totals;
  std::vector<double> hmm_day_totals;
  DaySeparation gmm_days;
  DaySeparation hmm_days;
  ComparisonTable comparison;  // Table 3 layout
};

// Trains on train_normal_days randomly chosen normal days, tests on the rest.
TestbedReport run_testbed(std::span<const LabeledDay> days, const std::string& ap,
                          const PipelineConfig& config);

std::string summary_markdown(const TestbedReport& report);
void write_testbed_report(const TestbedReport& report, const std::string& directory);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace wlanad::cli
