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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlanad/ingest.h"

namespace wlanad {

enum class ScenarioKind {
  kApShutdown,
  kHeavyUsageSingle,
  kHeavyUsageMulti,
  kJamLowInterval,
  kJamHighInterval,
  kJamSpecificClients,
};

inline constexpr std::array<ScenarioKind, 6> kAllScenarioKinds = {
    ScenarioKind::kApShutdown,      ScenarioKind::kHeavyUsageSingle,
    ScenarioKind::kHeavyUsageMulti, ScenarioKind::kJamLowInterval,
    ScenarioKind::kJamHighInterval, ScenarioKind::kJamSpecificClients};

std::string_view to_string(ScenarioKind kind);
// Throws std::invalid_argument for an unknown name.
ScenarioKind scenario_kind_from_string(std::string_view name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kApShutdown;
  std::int64_t start = 0;  // slot aligned
  int duration_minutes = 15;
  double traffic_multiplier = 50.0;
  int reassociation_seconds = 60;
  // Heavy usage and targeted jamming; chosen at generation time when empty.
  std::vector<std::string> target_clients;
  int target_count = 0;  // 0 = kind default

  std::int64_t end() const { return start + duration_minutes * 60LL; }
};

struct PopulationProfile {
  std::string ap = "ap-testbed";
  int regular_users = 6;
  int guest_min = 3;
  int guest_max = 4;
  double regular_participation = 0.95;
  // The generated window of each day, local hours.
  int day_start_hour = 8;
  int day_end_hour = 18;
  // Relative hourly rates for regular arrivals and departures (24 entries).
  std::vector<double> arrival_weights;
  std::vector<double> departure_weights;
  double session_mean_minutes = 150.0;  // until a spontaneous reassociation
  int reassociation_gap_min_seconds = 5;
  int reassociation_gap_max_seconds = 90;
  // Regular users leave once around midday with this probability.
  double lunch_break_probability = 0.5;
  int guest_arrival_first_hour = 9;
  int guest_arrival_last_hour = 15;
  double guest_stay_median_minutes = 150.0;
  double guest_stay_sigma = 0.4;
  // Log-normal traffic per full report interval.
  double input_octets_median = 2.0e6;
  double output_octets_median = 2.0e7;
  double octets_sigma = 0.35;
  double input_packet_bytes = 300.0;
  double output_packet_bytes = 1100.0;
  int alive_interval_minutes = 10;

  static PopulationProfile testbed();
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Per-slot label over the generated window; nullopt means normal.
struct GroundTruth {
  std::int64_t window_start = 0;
  std::vector<std::optional<ScenarioKind>> labels;

  std::int64_t slot_start(std::size_t i) const {
    return window_start + static_cast<std::int64_t>(i) * 900;
  }
  std::size_t anomalous_slots() const;
};

struct SimulatedDay {
  std::int64_t day_start = 0;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  std::string ap;
  std::vector<ScenarioSpec> scenarios;
  std::vector<AccountingRecord> records;
  GroundTruth truth;

  bool abnormal() const { return !scenarios.empty(); }
};

// Throws std::invalid_argument for scenarios that overlap, fall outside the
// day window, are not slot aligned or last outside [15, 60] minutes.
void validate_scenarios(std::span<const ScenarioSpec> scenarios,
                        std::int64_t window_start, std::int64_t window_end);

SimulatedDay generate_day(const PopulationProfile& profile,
                          std::int64_t day_start,
                          std::span<const ScenarioSpec> scenarios,
                          std::uint64_t seed);

struct CorpusOptions {
  int normal_days = 20;
  int abnormal_days = 10;
  int min_anomalies_per_day = 1;
  int max_anomalies_per_day = 2;
  // Monday 2015-11-02 00:00 UTC; weekends are skipped.
  std::int64_t first_day = 1446422400;
};

struct Corpus {
  PopulationProfile profile;
  std::vector<SimulatedDay> days;
  std::map<ScenarioKind, int> kind_slot_totals;

  std::size_t total_anomalous_slots() const;
};

Corpus generate_corpus(const PopulationProfile& profile,
                       const CorpusOptions& options, std::uint64_t seed);

// Day seed derived from the corpus seed; days can be generated independently.
std::uint64_t day_seed(std::uint64_t corpus_seed, int day_index);

std::string trace_file_name(const SimulatedDay& day, int index);

struct ManifestDay {
  std::string file;
  std::int64_t day_start = 0;
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  bool abnormal = false;
  std::vector<ScenarioSpec> scenarios;
  GroundTruth truth;
};

struct Manifest {
  std::string ap;
  std::uint64_t seed = 0;
  std::vector<ManifestDay> days;
  std::map<ScenarioKind, int> kind_slot_totals;
};

std::string manifest_to_json(const Corpus& corpus, std::uint64_t seed);
Manifest manifest_from_json(std::string_view text);

// Writes one trace CSV per day plus manifest.json into directory.
void write_corpus(const Corpus& corpus, std::uint64_t seed,
                  const std::string& directory);

}  // namespace wlanad
