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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "wlanad/features.h"
#include "wlanad/simulate.h"
#include "wlanad/timeutil.h"

namespace wlanad {
namespace {

constexpr std::int64_t kDay = 1446422400;  // Monday 2015-11-02
constexpr std::int64_t kTen = kDay + 10 * 3600;

ScenarioSpec spec(ScenarioKind kind, std::int64_t start = kTen, int minutes = 45) {
  ScenarioSpec s;
  s.kind = kind;
  s.start = start;
  s.duration_minutes = minutes;
  return s;
}

SimulatedDay day_with(const ScenarioSpec& s, std::uint64_t seed) {
  const std::vector<ScenarioSpec> one = {s};
  return generate_day(PopulationProfile::testbed(), kDay, one, seed);
}

std::vector<SlotFeatures> features(const SimulatedDay& d) {
  const auto sessions = sessionize(d.records).sessions;
  return aggregate(sessions, d.ap, d.window_start, d.window_end);
}

std::size_t slot_index(const SimulatedDay& d, std::int64_t t) {
  return static_cast<std::size_t>((t - d.window_start) / kSlotSeconds);
}

double median_sessions(const std::vector<SlotFeatures>& f) {
  std::vector<std::int64_t> v;
  for (const auto& s : f) v.push_back(s.session_count);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return static_cast<double>(v[v.size() / 2]);
}

class Seeds : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(Seeds, NormalDayIsCleanAndBounded) {
  const auto p = PopulationProfile::testbed();
  const auto d = generate_day(p, kDay, {}, GetParam());
  EXPECT_FALSE(d.abnormal());
  EXPECT_EQ(d.truth.labels.size(), 40u);
  EXPECT_EQ(d.truth.anomalous_slots(), 0u);

  std::ostringstream out;
  write_trace(out, d.records);
  std::istringstream in(out.str());
  const auto parsed = parse_trace(in);
  EXPECT_TRUE(parsed.issues.empty());
  EXPECT_EQ(parsed.records, d.records);
  const auto s = sessionize(parsed.records);
  EXPECT_TRUE(s.issues.empty());
  for (const auto& f : aggregate(s.sessions, d.ap, d.window_start, d.window_end)) {
    EXPECT_LE(f.user_count, p.regular_users + p.guest_max);
  }
}

TEST_P(Seeds, ShutdownLeavesCoveredSlotsEmpty) {
  const auto d = day_with(spec(ScenarioKind::kApShutdown), GetParam());
  EXPECT_TRUE(sessionize(d.records).issues.empty());
  const auto f = features(d);
  for (std::size_t i = slot_index(d, kTen); i < slot_index(d, kTen + 2700); ++i) {
    for (double v : f[i].values()) EXPECT_EQ(v, 0.0) << "slot " << i;
    EXPECT_EQ(d.truth.labels[i], ScenarioKind::kApShutdown);
  }
  EXPECT_EQ(d.truth.anomalous_slots(), 3u);
  for (const auto& r : d.records) {
    EXPECT_FALSE(r.event_time() >= kTen && r.event_time() < kTen + 2700) << r.session_id;
  }
  EXPECT_GT(f[slot_index(d, kTen) - 1].session_count, 0);
}

TEST_P(Seeds, JamLowIsOneStopThenSilence) {
  const auto base = generate_day(PopulationProfile::testbed(), kDay, {}, GetParam());
  const auto d = day_with(spec(ScenarioKind::kJamLowInterval), GetParam());
  EXPECT_TRUE(sessionize(d.records).issues.empty());
  std::set<std::string> present;
  for (const auto& s : sessionize(base.records).sessions) {
    if (s.start_time < kTen && s.end_time > kTen + 30) present.insert(s.client);
  }
  ASSERT_FALSE(present.empty());
  // Heartbeats due at 10:00:00 precede the cut and are still reported.
  std::map<std::string, int> stops;
  std::map<std::string, std::int64_t> stop_at;
  std::vector<const AccountingRecord*> alive;
  for (const auto& r : d.records) {
    const auto t = r.event_time();
    if (t < kTen || t >= kTen + 2700) continue;
    EXPECT_LE(t, kTen + 30) << "record during the silent period";
    EXPECT_NE(r.status, AccountingStatus::kStart);
    if (r.status == AccountingStatus::kAlive) {
      alive.push_back(&r);
      continue;
    }
    stops[r.calling_station] += 1;
    stop_at[r.session_id] = t;
  }
  for (const auto& c : present) EXPECT_EQ(stops[c], 1) << c;
  for (const auto* r : alive) {
    ASSERT_TRUE(stop_at.contains(r->session_id)) << r->session_id;
    EXPECT_LE(r->event_time(), stop_at[r->session_id]);
  }
  const auto f = features(d);
  for (std::size_t i = slot_index(d, kTen) + 1; i < slot_index(d, kTen + 2700); ++i) {
    EXPECT_EQ(f[i].session_count, 0);
  }
}

TEST_P(Seeds, JamHighIsShortSessionBurst) {
  ScenarioSpec s = spec(ScenarioKind::kJamHighInterval);
  s.reassociation_seconds = 60;
  const auto d = day_with(s, GetParam());
  EXPECT_TRUE(sessionize(d.records).issues.empty());
  const auto f = features(d);
  const double median = median_sessions(f);
  for (std::size_t i = slot_index(d, kTen); i < slot_index(d, kTen + 2700); ++i) {
    EXPECT_GE(static_cast<double>(f[i].session_count), 5.0 * median) << "slot " << i;
  }
  for (const auto& ss : sessionize(d.records).sessions) {
    if (ss.start_time > kTen && ss.end_time < kTen + 2700) {
      EXPECT_LE(ss.end_time - ss.start_time, 30);
    }
  }
}

// Per-second traffic rate of every report, split by whether the report
// falls inside [a, b).
struct Rates {
  std::vector<double> inside, outside;
};
std::map<std::string, Rates> report_rates(const SimulatedDay& d, std::int64_t a, std::int64_t b) {
  std::map<std::string, Rates> out;
  for (const auto& s : sessionize(d.records).sessions) {
    std::int64_t prev = s.start_time;
    for (const auto& delta : counter_deltas(s)) {
      const auto dt = delta.event_time - prev;
      prev = delta.event_time;
      if (dt < 60) continue;
      const double rate = static_cast<double>(delta.output_octets) / static_cast<double>(dt);
      auto& r = out[s.client];
      (delta.event_time >= a && delta.event_time < b ? r.inside : r.outside).push_back(rate);
    }
  }
  return out;
}

void expect_heavy(const SimulatedDay& d, std::size_t min_targets) {
  ASSERT_EQ(d.scenarios.size(), 1u);
  const auto& targets = d.scenarios[0].target_clients;
  EXPECT_GE(targets.size(), min_targets);
  const auto rates = report_rates(d, d.scenarios[0].start, d.scenarios[0].end());
  for (const auto& [client, r] : rates) {
    if (r.outside.empty()) continue;
    const double out_max = *std::max_element(r.outside.begin(), r.outside.end());
    const bool target = std::find(targets.begin(), targets.end(), client) != targets.end();
    if (target) {
      ASSERT_FALSE(r.inside.empty()) << client;
      EXPECT_GT(*std::min_element(r.inside.begin(), r.inside.end()), 5.0 * out_max) << client;
    } else {
      for (double v : r.inside) EXPECT_LT(v, 5.0 * out_max) << client;
    }
  }
}

TEST_P(Seeds, HeavySingleMultipliesOneUser) {
  const auto d = day_with(spec(ScenarioKind::kHeavyUsageSingle), GetParam());
  EXPECT_EQ(d.scenarios[0].target_clients.size(), 1u);
  expect_heavy(d, 1);
}

TEST_P(Seeds, HeavyMultiMultipliesSeveralUsers) {
  expect_heavy(day_with(spec(ScenarioKind::kHeavyUsageMulti), GetParam()), 2);
}

TEST_P(Seeds, JamSpecificCyclesOnlyTargets) {
  const auto d = day_with(spec(ScenarioKind::kJamSpecificClients), GetParam());
  EXPECT_TRUE(sessionize(d.records).issues.empty());
  const auto& targets = d.scenarios[0].target_clients;
  ASSERT_EQ(targets.size(), 2u);
  std::map<std::string, int> starts;
  for (const auto& r : d.records) {
    if (r.status == AccountingStatus::kStart && r.event_time() >= kTen &&
        r.event_time() < kTen + 2700) {
      starts[r.calling_station] += 1;
    }
  }
  for (const auto& [client, n] : starts) {
    const bool target = std::find(targets.begin(), targets.end(), client) != targets.end();
    if (target) {
      EXPECT_GE(n, 10) << client;
    } else {
      EXPECT_LE(n, 2) << client;
    }
  }
  for (const auto& t : targets) EXPECT_GE(starts[t], 10) << t;
}

INSTANTIATE_TEST_SUITE_P(Simulate, Seeds, ::testing::Values(1u, 7u, 42u, 1234u, 99999u));

TEST(Scenarios, Validation) {
  const auto p = PopulationProfile::testbed();
  const std::int64_t ws = kDay + 8 * 3600, we = kDay + 18 * 3600;
  std::vector<ScenarioSpec> overlap = {spec(ScenarioKind::kApShutdown, kTen, 30),
                                       spec(ScenarioKind::kJamLowInterval, kTen + 900, 30)};
  EXPECT_THROW(validate_scenarios(overlap, ws, we), std::invalid_argument);
  EXPECT_THROW(generate_day(p, kDay, overlap, 1), std::invalid_argument);
  const std::vector<ScenarioSpec> short_one = {spec(ScenarioKind::kApShutdown, kTen, 10)};
  EXPECT_THROW(validate_scenarios(short_one, ws, we), std::invalid_argument);
  const std::vector<ScenarioSpec> long_one = {spec(ScenarioKind::kApShutdown, kTen, 75)};
  EXPECT_THROW(validate_scenarios(long_one, ws, we), std::invalid_argument);
  const std::vector<ScenarioSpec> unaligned = {spec(ScenarioKind::kApShutdown, kTen + 60, 30)};
  EXPECT_THROW(validate_scenarios(unaligned, ws, we), std::invalid_argument);
  const std::vector<ScenarioSpec> outside = {spec(ScenarioKind::kApShutdown, kDay + 6 * 3600, 30)};
  EXPECT_THROW(validate_scenarios(outside, ws, we), std::invalid_argument);
  const std::vector<ScenarioSpec> back_to_back = {spec(ScenarioKind::kApShutdown, kTen, 30),
                                                  spec(ScenarioKind::kJamLowInterval, kTen + 1800, 30)};
  EXPECT_NO_THROW(validate_scenarios(back_to_back, ws, we));
}

TEST(Profile, ValidationNamesField) {
  auto p = PopulationProfile::testbed();
  p.alive_interval_minutes = 12;
  try {
    p.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("alive_interval_minutes"), std::string::npos) << e.what();
  }
  p = PopulationProfile::testbed();
  p.regular_users = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_EQ(scenario_kind_from_string(to_string(ScenarioKind::kJamHighInterval)),
            ScenarioKind::kJamHighInterval);
}

TEST(Corpus, DefaultShapeAndAccounting) {
  const auto p = PopulationProfile::testbed();
  const auto c = generate_corpus(p, CorpusOptions{}, 7);
  ASSERT_EQ(c.days.size(), 30u);
  int normal = 0;
  std::set<std::int64_t> dates;
  for (const auto& d : c.days) {
    normal += !d.abnormal();
    EXPECT_EQ(d.abnormal(), d.truth.anomalous_slots() > 0);
    EXPECT_LT(weekday(d.day_start), 5);
    dates.insert(d.day_start);
    for (const auto& s : d.scenarios) {
      EXPECT_GE(s.duration_minutes, 15);
      EXPECT_LE(s.duration_minutes, 60);
    }
  }
  EXPECT_EQ(normal, 20);
  EXPECT_EQ(dates.size(), 30u);
  std::size_t sum = 0;
  for (const auto& [kind, n] : c.kind_slot_totals) sum += static_cast<std::size_t>(n);
  EXPECT_EQ(sum, c.total_anomalous_slots());
  EXPECT_GT(sum, 0u);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Corpus, SeedFixesBytes) {
  const auto p = PopulationProfile::testbed();
  CorpusOptions o;
  o.normal_days = 3;
  o.abnormal_days = 2;
  const auto root = std::filesystem::temp_directory_path() / "wlanad_corpus_test";
  std::filesystem::remove_all(root);
  write_corpus(generate_corpus(p, o, 11), 11, (root / "a").string());
  write_corpus(generate_corpus(p, o, 11), 11, (root / "b").string());
  write_corpus(generate_corpus(p, o, 12), 12, (root / "c").string());
  std::size_t files = 0;
  bool differs = false;
  for (const auto& e : std::filesystem::directory_iterator(root / "a")) {
    ++files;
    const auto name = e.path().filename();
    EXPECT_EQ(slurp(e.path()), slurp(root / "b" / name)) << name;
    differs |= slurp(e.path()) != slurp(root / "c" / name);
  }
  EXPECT_EQ(files, 6u);  // five traces and the manifest
  EXPECT_TRUE(differs);

  const Manifest m = manifest_from_json(slurp(root / "a" / "manifest.json"));
  EXPECT_EQ(m.seed, 11u);
  ASSERT_EQ(m.days.size(), 5u);
  const auto c = generate_corpus(p, o, 11);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(m.days[i].file, trace_file_name(c.days[i], static_cast<int>(i)));
    EXPECT_EQ(m.days[i].truth.labels, c.days[i].truth.labels);
    EXPECT_EQ(m.days[i].abnormal, c.days[i].abnormal());
  }
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace wlanad
