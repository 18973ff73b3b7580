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
#include "wlanad/simulate.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "json_util.h"
#include "wlanad/timeutil.h"

namespace wlanad {
namespace {

using internal::Json;
using Rng = std::mt19937_64;

constexpr int kManifestVersion = 1;
constexpr std::int64_t kHour = 3600;

struct KindName {
  ScenarioKind kind;
  std::string_view name;
};
constexpr KindName kKindNames[] = {
    {ScenarioKind::kApShutdown, "ap_shutdown"},
    {ScenarioKind::kHeavyUsageSingle, "heavy_usage_single"},
    {ScenarioKind::kHeavyUsageMulti, "heavy_usage_multi"},
    {ScenarioKind::kJamLowInterval, "jam_low_interval"},
    {ScenarioKind::kJamHighInterval, "jam_high_interval"},
    {ScenarioKind::kJamSpecificClients, "jam_specific_clients"},
};

// One association of a client, before it is rendered as records.
struct SimSession {
  std::string client;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

int pick_hour(Rng& rng, const std::vector<double>& weights, int first, int last) {
  std::vector<double> w(weights.begin() + first, weights.begin() + last);
  std::discrete_distribution<int> d(w.begin(), w.end());
  return first + d(rng);
}

std::string regular_id(int i) { return fmt::format("reg-{:02d}", i + 1); }

// Splits a presence interval into sessions separated by short reassociation gaps.
void split_presence(const PopulationProfile& p, Rng& rng, const std::string& client,
                    std::int64_t from, std::int64_t to, std::vector<SimSession>& out) {
  std::exponential_distribution<double> length(1.0 / (p.session_mean_minutes * 60.0));
  std::int64_t t = from;
  while (t < to) {
    const auto len = std::max<std::int64_t>(60, static_cast<std::int64_t>(length(rng)));
    const std::int64_t end = std::min(to, t + len);
    out.push_back({client, t, end});
    t = end + uniform(rng, p.reassociation_gap_min_seconds, p.reassociation_gap_max_seconds);
  }
}

std::vector<SimSession> normal_sessions(const PopulationProfile& p, std::int64_t ws,
                                        std::int64_t we, std::int64_t day_start,
                                        Rng& rng, std::vector<std::string>& clients) {
  std::vector<SimSession> out;
  std::bernoulli_distribution present(p.regular_participation);
  std::bernoulli_distribution lunch(p.lunch_break_probability);
  for (int i = 0; i < p.regular_users; ++i) {
    const std::string id = regular_id(i);
    clients.push_back(id);
    const bool here = present(rng);
    // Draws happen whether or not the user shows up so days stay comparable.
    // Hours outside the window are allowed; presence is clipped to it below.
    const int ah = pick_hour(rng, p.arrival_weights, 0, 24);
    const int dh = pick_hour(rng, p.departure_weights, 0, 24);
    std::int64_t arrive = day_start + ah * kHour + uniform(rng, 0, kHour - 1);
    std::int64_t leave = day_start + dh * kHour + uniform(rng, 0, kHour - 1);
    const bool takes_lunch = lunch(rng);
    const std::int64_t lunch_out = day_start + 12 * kHour + uniform(rng, 0, kHour - 1);
    const std::int64_t lunch_back = lunch_out + uniform(rng, 30 * 60, 60 * 60);
    if (!here) continue;
    arrive = std::max(arrive, ws);
    leave = std::min(leave, we - 1);
    if (leave - arrive < kHour) continue;
    if (takes_lunch && lunch_out > arrive + 600 && lunch_back < leave - 600) {
      split_presence(p, rng, id, arrive, lunch_out, out);
      split_presence(p, rng, id, lunch_back, leave, out);
    } else {
      split_presence(p, rng, id, arrive, leave, out);
    }
  }
  const int guests = static_cast<int>(uniform(rng, p.guest_min, p.guest_max));
  std::lognormal_distribution<double> stay(std::log(p.guest_stay_median_minutes * 60.0),
                                           p.guest_stay_sigma);
  for (int g = 0; g < guests; ++g) {
    const std::string id = fmt::format("guest-{}-{}", format_date(day_start), g + 1);
    clients.push_back(id);
    const std::int64_t arrive =
        day_start + uniform(rng, p.guest_arrival_first_hour * kHour,
                            (p.guest_arrival_last_hour + 1) * kHour - 1);
    const std::int64_t leave =
        std::min(we - 1, arrive + std::max<std::int64_t>(600, static_cast<std::int64_t>(stay(rng))));
    if (arrive < ws || leave <= arrive) continue;
    split_presence(p, rng, id, arrive, leave, out);
  }
  return out;
}

bool overlaps(const SimSession& s, std::int64_t a, std::int64_t b) {
  return s.start < b && s.end > a;
}

bool present_at(const std::vector<SimSession>& sessions, const std::string& client,
                std::int64_t t) {
  return std::any_of(sessions.begin(), sessions.end(), [&](const SimSession& s) {
    return s.client == client && s.start <= t && t < s.end;
  });
}

std::int64_t overlap_seconds(const std::vector<SimSession>& sessions,
                             const std::string& client, std::int64_t a, std::int64_t b) {
  std::int64_t total = 0;
  for (const auto& s : sessions) {
    if (s.client != client) continue;
    total += std::max<std::int64_t>(0, std::min(b, s.end) - std::max(a, s.start));
  }
  return total;
}

// Clients with any time in [a, b), the best covered first.
std::vector<std::string> candidates(const std::vector<SimSession>& sessions,
                                    const std::vector<std::string>& clients, std::int64_t a,
                                    std::int64_t b, Rng& rng) {
  std::vector<std::string> out;
  for (const auto& c : clients) {
    if (overlap_seconds(sessions, c, a, b) > 0) out.push_back(c);
  }
  std::shuffle(out.begin(), out.end(), rng);
  std::stable_sort(out.begin(), out.end(), [&](const std::string& x, const std::string& y) {
    return overlap_seconds(sessions, x, a, b) > overlap_seconds(sessions, y, a, b);
  });
  return out;
}

// Makes sure client is associated for all of [a, b).
void force_presence(std::vector<SimSession>& sessions, const std::string& client,
                    std::int64_t a, std::int64_t b, std::int64_t ws, std::int64_t we,
                    Rng& rng) {
  if (overlap_seconds(sessions, client, a, b) == b - a) return;
  sessions.push_back({client, std::max(ws, a - uniform(rng, 60, 600)),
                      std::min(we - 1, b + uniform(rng, 60, 600))});
}

std::vector<std::string> choose_targets(ScenarioSpec& spec, int default_count,
                                        std::vector<SimSession>& sessions,
                                        const std::vector<std::string>& clients,
                                        std::int64_t ws, std::int64_t we, Rng& rng,
                                        bool full_cover) {
  if (spec.target_clients.empty()) {
    const int want = spec.target_count > 0 ? spec.target_count : default_count;
    auto pool = candidates(sessions, clients, spec.start, spec.end(), rng);
    for (const auto& c : clients) {
      if (std::find(pool.begin(), pool.end(), c) == pool.end()) pool.push_back(c);
    }
    pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(want)));
    spec.target_clients = pool;
  }
  spec.target_count = static_cast<int>(spec.target_clients.size());
  for (const auto& c : spec.target_clients) {
    if (full_cover || overlap_seconds(sessions, c, spec.start, spec.end()) == 0) {
      force_presence(sessions, c, spec.start, spec.end(), ws, we, rng);
    }
  }
  return spec.target_clients;
}

// Removes [a, b) from the sessions of the selected clients. Sessions running
// at a end at a + cut_offset; sessions running past b resume after b.
template <typename Selected>
void cut_window(std::vector<SimSession>& sessions, std::int64_t a, std::int64_t b,
                Selected selected, std::int64_t cut_lo, std::int64_t cut_hi,
                std::int64_t resume_lo, std::int64_t resume_hi, Rng& rng) {
  std::vector<SimSession> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) {
    if (!selected(s.client) || !overlaps(s, a, b)) {
      out.push_back(s);
      continue;
    }
    if (s.start < a) {
      const std::int64_t cut = std::min(s.end, a + uniform(rng, cut_lo, cut_hi));
      if (cut > s.start) out.push_back({s.client, s.start, cut});
    }
    if (s.end > b) {
      const std::int64_t resume = std::max(s.start, b + uniform(rng, resume_lo, resume_hi));
      if (resume < s.end) out.push_back({s.client, resume, s.end});
    }
  }
  sessions = std::move(out);
}

// Short Start/Stop cycles while the client would otherwise have been online.
void add_cycles(std::vector<SimSession>& sessions, const std::vector<SimSession>& before,
                const std::string& client, const ScenarioSpec& spec, Rng& rng) {
  const std::int64_t period = spec.reassociation_seconds;
  for (std::int64_t c0 = spec.start + period; c0 < spec.end(); c0 += period) {
    const std::int64_t c = c0 + uniform(rng, 0, 5);
    const std::int64_t life = uniform(rng, 10, std::max<std::int64_t>(10, period / 2));
    const std::int64_t end = std::min(c + life, spec.end() - 1);
    if (end <= c || !present_at(before, client, c)) continue;
    sessions.push_back({client, c, end});
  }
}

void apply_scenario(ScenarioSpec& spec, std::vector<SimSession>& sessions,
                    const std::vector<std::string>& clients, std::int64_t ws,
                    std::int64_t we, Rng& rng) {
  const std::int64_t a = spec.start;
  const std::int64_t b = spec.end();
  auto everyone = [](const std::string&) { return true; };
  switch (spec.kind) {
    case ScenarioKind::kApShutdown:
      // Stops land just before the window so its covered slots stay empty.
      cut_window(sessions, a, b, everyone, -1, -1, 5, 120, rng);
      break;
    case ScenarioKind::kHeavyUsageSingle:
      choose_targets(spec, 1, sessions, clients, ws, we, rng, true);
      break;
    case ScenarioKind::kHeavyUsageMulti:
      choose_targets(spec, static_cast<int>(uniform(rng, 2, 3)), sessions, clients, ws,
                     we, rng, true);
      break;
    case ScenarioKind::kJamLowInterval:
      cut_window(sessions, a, b, everyone, 1, 30, 5, 60, rng);
      break;
    case ScenarioKind::kJamHighInterval:
    case ScenarioKind::kJamSpecificClients: {
      std::vector<std::string> targets;
      if (spec.kind == ScenarioKind::kJamHighInterval) {
        targets = clients;
      } else {
        targets = choose_targets(spec, 2, sessions, clients, ws, we, rng, false);
      }
      auto selected = [&](const std::string& c) {
        return std::find(targets.begin(), targets.end(), c) != targets.end();
      };
      const std::vector<SimSession> before = sessions;
      cut_window(sessions, a, b, selected, 1, 10, 5, 60, rng);
      for (const auto& c : targets) add_cycles(sessions, before, c, spec, rng);
      break;
    }
  }
}

struct HeavyWindow {
  std::int64_t start;
  std::int64_t end;
  double multiplier;
  std::vector<std::string> clients;
};

std::int64_t draw_octets(Rng& rng, double median, double sigma, double fraction) {
  std::lognormal_distribution<double> d(std::log(median * fraction), sigma);
  return static_cast<std::int64_t>(std::llround(d(rng)));
}

void render(const PopulationProfile& p, const std::vector<SimSession>& sessions,
            const std::vector<HeavyWindow>& heavy, std::int64_t day_start, Rng& rng,
            std::vector<AccountingRecord>& out) {
  const std::int64_t alive = p.alive_interval_minutes * 60LL;
  const std::string date = format_date(day_start);
  int seq = 0;
  for (const auto& s : sessions) {
    const std::string id = fmt::format("{}-{:05d}", date, ++seq);
    auto base = [&](AccountingStatus status, std::int64_t event) {
      AccountingRecord r;
      r.status = status;
      r.session_id = id;
      r.called_station = p.ap;
      r.calling_station = s.client;
      const std::int64_t delay = uniform(rng, 0, 2);
      r.delay_time = delay;
      r.timestamp = event + delay;
      return r;
    };
    out.push_back(base(AccountingStatus::kStart, s.start));
    std::int64_t in = 0, outo = 0;
    std::int64_t prev = s.start;
    auto report = [&](AccountingStatus status, std::int64_t t) {
      const double fraction = static_cast<double>(t - prev) / static_cast<double>(alive);
      double mult = 1.0;
      for (const auto& h : heavy) {
        if (t >= h.start && t < h.end &&
            std::find(h.clients.begin(), h.clients.end(), s.client) != h.clients.end()) {
          mult = h.multiplier;
        }
      }
      in += static_cast<std::int64_t>(
          std::llround(mult * static_cast<double>(
                                  draw_octets(rng, p.input_octets_median, p.octets_sigma, fraction))));
      outo += static_cast<std::int64_t>(
          std::llround(mult * static_cast<double>(
                                  draw_octets(rng, p.output_octets_median, p.octets_sigma, fraction))));
      AccountingRecord r = base(status, t);
      r.session_time = t - s.start;
      r.input_octets = in;
      r.output_octets = outo;
      r.input_packets = std::llround(static_cast<double>(in) / p.input_packet_bytes);
      r.output_packets = std::llround(static_cast<double>(outo) / p.output_packet_bytes);
      out.push_back(std::move(r));
      prev = t;
    };
    for (std::int64_t t = s.start + alive; t < s.end; t += alive) {
      report(AccountingStatus::kAlive, t);
    }
    report(AccountingStatus::kStop, s.end);
  }
}

Json scenario_to_json(const ScenarioSpec& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  j["start"] = s.start;
  j["start_iso"] = format_iso8601(s.start);
  j["duration_minutes"] = s.duration_minutes;
  j["traffic_multiplier"] = s.traffic_multiplier;
  j["reassociation_seconds"] = s.reassociation_seconds;
  j["target_clients"] = s.target_clients;
  j["target_count"] = s.target_count;
  return j;
}

ScenarioSpec scenario_from_json(const Json& j) {
  ScenarioSpec s;
  s.kind = scenario_kind_from_string(internal::require(j, "kind").get<std::string>());
  s.start = internal::require(j, "start").get<std::int64_t>();
  s.duration_minutes = internal::require(j, "duration_minutes").get<int>();
  s.traffic_multiplier = j.value("traffic_multiplier", 50.0);
  s.reassociation_seconds = j.value("reassociation_seconds", 60);
  s.target_clients = j.value("target_clients", std::vector<std::string>{});
  s.target_count = j.value("target_count", 0);
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (k.name == name) return k.kind;
  }
  throw std::invalid_argument(fmt::format("unknown scenario kind '{}'", name));
}

PopulationProfile PopulationProfile::testbed() {
  PopulationProfile p;
  p.arrival_weights.assign(24, 0.0);
  p.departure_weights.assign(24, 0.0);
  // A home testbed: most devices are online before the window opens and
  // stay past its end.
  p.arrival_weights[6] = 2.0;
  p.arrival_weights[7] = 3.0;
  p.arrival_weights[8] = 3.0;
  p.arrival_weights[9] = 2.0;
  p.arrival_weights[10] = 1.0;
  p.departure_weights[16] = 1.0;
  p.departure_weights[17] = 2.0;
  p.departure_weights[18] = 3.0;
  p.departure_weights[19] = 3.0;
  p.departure_weights[20] = 1.0;
  return p;
}

void PopulationProfile::validate() const {
  auto fail = [](std::string_view field, std::string_view why) {
    throw std::invalid_argument(fmt::format("profile field '{}': {}", field, why));
  };
  if (ap.empty()) fail("ap", "must not be empty");
  if (regular_users < 1) fail("regular_users", "must be positive");
  if (guest_min < 0 || guest_max < guest_min) fail("guest_max", "must be >= guest_min >= 0");
  if (!(regular_participation > 0.0 && regular_participation <= 1.0)) {
    fail("regular_participation", "must be in (0, 1]");
  }
  if (day_start_hour < 0 || day_end_hour > 24 || day_end_hour - day_start_hour < 2) {
    fail("day_end_hour", "window must span at least two hours inside the day");
  }
  auto check_weights = [&](const std::vector<double>& w, std::string_view field) {
    if (w.size() != 24) fail(field, "needs 24 hourly entries");
    double in_window = 0.0;
    for (int h = 0; h < 24; ++h) {
      if (!(w[static_cast<std::size_t>(h)] >= 0.0)) fail(field, "entries must be >= 0");
      if (h >= day_start_hour && h < day_end_hour) in_window += w[static_cast<std::size_t>(h)];
    }
    if (in_window <= 0.0) fail(field, "no positive weight inside the day window");
  };
  check_weights(arrival_weights, "arrival_weights");
  check_weights(departure_weights, "departure_weights");
  if (!(session_mean_minutes > 0.0)) fail("session_mean_minutes", "must be positive");
  if (reassociation_gap_min_seconds < 1 ||
      reassociation_gap_max_seconds < reassociation_gap_min_seconds) {
    fail("reassociation_gap_max_seconds", "must be >= the minimum gap >= 1");
  }
  if (!(lunch_break_probability >= 0.0 && lunch_break_probability <= 1.0)) {
    fail("lunch_break_probability", "must be in [0, 1]");
  }
  if (guest_arrival_first_hour < day_start_hour || guest_arrival_last_hour >= day_end_hour ||
      guest_arrival_last_hour < guest_arrival_first_hour) {
    fail("guest_arrival_last_hour", "guest arrivals must fall inside the day window");
  }
  if (!(guest_stay_median_minutes > 0.0)) fail("guest_stay_median_minutes", "must be positive");
  if (!(guest_stay_sigma >= 0.0)) fail("guest_stay_sigma", "must be >= 0");
  if (!(input_octets_median > 0.0)) fail("input_octets_median", "must be positive");
  if (!(output_octets_median > 0.0)) fail("output_octets_median", "must be positive");
  if (!(octets_sigma >= 0.0)) fail("octets_sigma", "must be >= 0");
  if (!(input_packet_bytes > 0.0)) fail("input_packet_bytes", "must be positive");
  if (!(output_packet_bytes > 0.0)) fail("output_packet_bytes", "must be positive");
  if (alive_interval_minutes != 10 && alive_interval_minutes != 15) {
    fail("alive_interval_minutes", "must be 10 or 15");
  }
}

std::size_t GroundTruth::anomalous_slots() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); }));
}

void validate_scenarios(std::span<const ScenarioSpec> scenarios, std::int64_t window_start,
                        std::int64_t window_end) {
  std::vector<const ScenarioSpec*> sorted;
  for (const auto& s : scenarios) {
    if (s.start % kSlotSeconds != 0) {
      throw std::invalid_argument(
          fmt::format("scenario at {} is not slot aligned", format_iso8601(s.start)));
    }
    if (s.duration_minutes < 15 || s.duration_minutes > 60) {
      throw std::invalid_argument(fmt::format(
          "scenario duration {} min is outside [15, 60]", s.duration_minutes));
    }
    if (s.start < window_start || s.end() > window_end) {
      throw std::invalid_argument(fmt::format(
          "scenario {}..{} falls outside the day window {}..{}", format_iso8601(s.start),
          format_iso8601(s.end()), format_iso8601(window_start), format_iso8601(window_end)));
    }
    if (!(s.traffic_multiplier > 0.0)) {
      throw std::invalid_argument("traffic_multiplier must be positive");
    }
    if (s.reassociation_seconds < 20) {
      throw std::invalid_argument("reassociation_seconds must be at least 20");
    }
    sorted.push_back(&s);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ScenarioSpec* x, const ScenarioSpec* y) { return x->start < y->start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start < sorted[i - 1]->end()) {
      throw std::invalid_argument(fmt::format("scenarios at {} and {} overlap",
                                              format_iso8601(sorted[i - 1]->start),
                                              format_iso8601(sorted[i]->start)));
    }
  }
}

SimulatedDay generate_day(const PopulationProfile& profile, std::int64_t day_start,
                          std::span<const ScenarioSpec> scenarios, std::uint64_t seed) {
  profile.validate();
  SimulatedDay day;
  day.day_start = day_start;
  day.window_start = day_start + profile.day_start_hour * kHour;
  day.window_end = day_start + profile.day_end_hour * kHour;
  day.ap = profile.ap;
  validate_scenarios(scenarios, day.window_start, day.window_end);
  day.scenarios.assign(scenarios.begin(), scenarios.end());
  std::sort(day.scenarios.begin(), day.scenarios.end(),
            [](const ScenarioSpec& x, const ScenarioSpec& y) { return x.start < y.start; });

  // Independent streams so adding a scenario does not reshuffle the population.
  Rng pop_rng(splitmix64(seed));
  Rng scenario_rng(splitmix64(seed ^ 0x5ca1ab1eULL));
  Rng traffic_rng(splitmix64(seed ^ 0x7aff1cULL));

  std::vector<std::string> clients;
  std::vector<SimSession> sessions =
      normal_sessions(profile, day.window_start, day.window_end, day_start, pop_rng, clients);
  std::vector<HeavyWindow> heavy;
  for (auto& spec : day.scenarios) {
    apply_scenario(spec, sessions, clients, day.window_start, day.window_end, scenario_rng);
    if (spec.kind == ScenarioKind::kHeavyUsageSingle ||
        spec.kind == ScenarioKind::kHeavyUsageMulti) {
      heavy.push_back({spec.start, spec.end(), spec.traffic_multiplier, spec.target_clients});
    }
  }
  std::sort(sessions.begin(), sessions.end(), [](const SimSession& x, const SimSession& y) {
    return std::tie(x.start, x.client, x.end) < std::tie(y.start, y.client, y.end);
  });
  render(profile, sessions, heavy, day_start, traffic_rng, day.records);
  std::stable_sort(day.records.begin(), day.records.end(),
                   [](const AccountingRecord& x, const AccountingRecord& y) {
                     return x.timestamp < y.timestamp;
                   });

  const auto slots = static_cast<std::size_t>((day.window_end - day.window_start) / kSlotSeconds);
  day.truth.window_start = day.window_start;
  day.truth.labels.assign(slots, std::nullopt);
  for (const auto& spec : day.scenarios) {
    for (std::size_t i = 0; i < slots; ++i) {
      const std::int64_t a = day.truth.slot_start(i);
      if (a < spec.end() && a + kSlotSeconds > spec.start) day.truth.labels[i] = spec.kind;
    }
  }
  return day;
}

std::uint64_t day_seed(std::uint64_t corpus_seed, int day_index) {
  return splitmix64(splitmix64(corpus_seed) + static_cast<std::uint64_t>(day_index) + 1);
}

std::size_t Corpus::total_anomalous_slots() const {
  std::size_t total = 0;
  for (const auto& d : days) total += d.truth.anomalous_slots();
  return total;
}

Corpus generate_corpus(const PopulationProfile& profile, const CorpusOptions& options,
                       std::uint64_t seed) {
  profile.validate();
  if (options.normal_days < 1 || options.abnormal_days < 1) {
    throw std::invalid_argument("corpus needs at least one normal and one abnormal day");
  }
  if (options.min_anomalies_per_day < 1 ||
      options.max_anomalies_per_day < options.min_anomalies_per_day ||
      options.max_anomalies_per_day > 4) {
    throw std::invalid_argument("anomalies per day must satisfy 1 <= min <= max <= 4");
  }
  Rng rng(splitmix64(seed ^ 0xc0ffeeULL));
  const int total = options.normal_days + options.abnormal_days;

  std::vector<bool> abnormal(static_cast<std::size_t>(total), false);
  std::fill(abnormal.begin(), abnormal.begin() + options.abnormal_days, true);
  std::shuffle(abnormal.begin(), abnormal.end(), rng);

  // Kinds are dealt from shuffled decks so every kind shows up.
  std::vector<ScenarioKind> deck;
  auto next_kind = [&] {
    if (deck.empty()) {
      deck.assign(kAllScenarioKinds.begin(), kAllScenarioKinds.end());
      std::shuffle(deck.begin(), deck.end(), rng);
    }
    const ScenarioKind k = deck.back();
    deck.pop_back();
    return k;
  };

  Corpus corpus;
  corpus.profile = profile;
  for (ScenarioKind k : kAllScenarioKinds) corpus.kind_slot_totals[k] = 0;
  std::int64_t day_start = options.first_day;
  for (int i = 0; i < total; ++i) {
    while (weekday(day_start) >= 5) day_start += kDaySeconds;
    std::vector<ScenarioSpec> specs;
    if (abnormal[static_cast<std::size_t>(i)]) {
      const int count = static_cast<int>(
          uniform(rng, options.min_anomalies_per_day, options.max_anomalies_per_day));
      // Scenarios start between 09:00 and 17:00 when the AP is busy.
      const std::int64_t lo = day_start + 9 * kHour;
      const std::int64_t hi = day_start + std::min(17, profile.day_end_hour) * kHour;
      for (int a = 0; a < count; ++a) {
        ScenarioSpec s;
        s.kind = next_kind();
        s.duration_minutes = 15 * static_cast<int>(uniform(rng, 1, 4));
        for (int attempt = 0; attempt < 100; ++attempt) {
          const auto slots = (hi - lo - s.duration_minutes * 60LL) / kSlotSeconds;
          s.start = lo + uniform(rng, 0, slots) * kSlotSeconds;
          const bool clash = std::any_of(specs.begin(), specs.end(), [&](const ScenarioSpec& o) {
            // One clear slot between scenarios keeps their effects apart.
            return s.start < o.end() + kSlotSeconds && o.start < s.end() + kSlotSeconds;
          });
          if (!clash) {
            specs.push_back(s);
            break;
          }
        }
      }
    }
    corpus.days.push_back(generate_day(profile, day_start, specs, day_seed(seed, i)));
    for (const auto& l : corpus.days.back().truth.labels) {
      if (l) corpus.kind_slot_totals[*l] += 1;
    }
    day_start += kDaySeconds;
  }
  return corpus;
}

std::string trace_file_name(const SimulatedDay& day, int index) {
  return fmt::format("day{:02d}_{}.csv", index + 1, format_date(day.day_start));
}

std::string manifest_to_json(const Corpus& corpus, std::uint64_t seed) {
  Json doc;
  doc["version"] = kManifestVersion;
  doc["ap"] = corpus.profile.ap;
  doc["seed"] = seed;
  Json days = Json::array();
  for (std::size_t i = 0; i < corpus.days.size(); ++i) {
    const auto& d = corpus.days[i];
    Json jd;
    jd["file"] = trace_file_name(d, static_cast<int>(i));
    jd["date"] = format_date(d.day_start);
    jd["day_start"] = d.day_start;
    jd["window_start"] = d.window_start;
    jd["window_end"] = d.window_end;
    jd["abnormal"] = d.abnormal();
    Json scenarios = Json::array();
    for (const auto& s : d.scenarios) scenarios.push_back(scenario_to_json(s));
    jd["scenarios"] = std::move(scenarios);
    Json labels = Json::array();
    for (const auto& l : d.truth.labels) {
      labels.push_back(l ? Json(std::string(to_string(*l))) : Json(nullptr));
    }
    jd["labels"] = std::move(labels);
    days.push_back(std::move(jd));
  }
  doc["days"] = std::move(days);
  Json totals = Json::object();
  for (const auto& [kind, n] : corpus.kind_slot_totals) totals[std::string(to_string(kind))] = n;
  doc["kind_slot_totals"] = std::move(totals);
  doc["total_anomalous_slots"] = corpus.total_anomalous_slots();
  return doc.dump(2);
}

Manifest manifest_from_json(std::string_view text) {
  const Json doc = internal::parse_json(text, "manifest");
  if (internal::require(doc, "version").get<int>() != kManifestVersion) {
    throw std::runtime_error("unsupported manifest version");
  }
  Manifest m;
  m.ap = internal::require(doc, "ap").get<std::string>();
  m.seed = internal::require(doc, "seed").get<std::uint64_t>();
  for (const auto& jd : internal::require(doc, "days")) {
    ManifestDay d;
    d.file = internal::require(jd, "file").get<std::string>();
    d.day_start = internal::require(jd, "day_start").get<std::int64_t>();
    d.window_start = internal::require(jd, "window_start").get<std::int64_t>();
    d.window_end = internal::require(jd, "window_end").get<std::int64_t>();
    d.abnormal = internal::require(jd, "abnormal").get<bool>();
    for (const auto& js : internal::require(jd, "scenarios")) {
      d.scenarios.push_back(scenario_from_json(js));
    }
    d.truth.window_start = d.window_start;
    for (const auto& l : internal::require(jd, "labels")) {
      if (l.is_null()) {
        d.truth.labels.push_back(std::nullopt);
      } else {
        d.truth.labels.push_back(scenario_kind_from_string(l.get<std::string>()));
      }
    }
    const auto expected = static_cast<std::size_t>((d.window_end - d.window_start) / kSlotSeconds);
    if (d.truth.labels.size() != expected) {
      throw std::runtime_error(
          fmt::format("manifest day '{}' has {} labels, expected {}", d.file,
                      d.truth.labels.size(), expected));
    }
    m.days.push_back(std::move(d));
  }
  for (const auto& [name, n] : internal::require(doc, "kind_slot_totals").items()) {
    m.kind_slot_totals[scenario_kind_from_string(name)] = n.get<int>();
  }
  return m;
}

void write_corpus(const Corpus& corpus, std::uint64_t seed, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  for (std::size_t i = 0; i < corpus.days.size(); ++i) {
    const fs::path path =
        fs::path(directory) / trace_file_name(corpus.days[i], static_cast<int>(i));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    write_trace(out, corpus.days[i].records);
  }
  const fs::path manifest = fs::path(directory) / "manifest.json";
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", manifest.string()));
  out << manifest_to_json(corpus, seed) << '\n';
}

}  // namespace wlanad
