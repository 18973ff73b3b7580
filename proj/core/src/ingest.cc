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
#include "wlanad/ingest.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace wlanad {
namespace {

constexpr std::size_t kFieldCount = 11;

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      break;
    }
    fields.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
  return fields;
}

// Empty -> nullopt; malformed -> throws with the column name.
std::optional<std::int64_t> parse_optional_int(std::string_view text,
                                               std::string_view column) {
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("{} is not an integer: '{}'", column, text));
  }
  if (value < 0) {
    throw std::invalid_argument(fmt::format("negative {}", column));
  }
  return value;
}

std::optional<AccountingStatus> parse_status(std::string_view text) {
  if (text == "Start") return AccountingStatus::kStart;
  if (text == "Alive") return AccountingStatus::kAlive;
  if (text == "Stop") return AccountingStatus::kStop;
  return std::nullopt;
}

AccountingRecord parse_line(std::string_view line) {
  const auto fields = split_csv(line);
  if (fields.size() != kFieldCount) {
    throw std::invalid_argument(
        fmt::format("expected {} fields, got {}", kFieldCount, fields.size()));
  }
  AccountingRecord r;
  const auto status = parse_status(fields[0]);
  if (!status) {
    throw std::invalid_argument(fmt::format("unknown status '{}'", fields[0]));
  }
  r.status = *status;
  r.session_id = std::string(fields[1]);
  if (r.session_id.empty()) throw std::invalid_argument("empty session_id");
  r.session_time = parse_optional_int(fields[2], "session_time");
  r.delay_time = parse_optional_int(fields[3], "delay_time");
  r.called_station = std::string(fields[4]);
  r.calling_station = std::string(fields[5]);
  const auto ts = parse_optional_int(fields[6], "timestamp");
  if (!ts) throw std::invalid_argument("missing timestamp");
  r.timestamp = *ts;
  r.input_octets = parse_optional_int(fields[7], "input_octets");
  r.output_octets = parse_optional_int(fields[8], "output_octets");
  r.input_packets = parse_optional_int(fields[9], "input_packets");
  r.output_packets = parse_optional_int(fields[10], "output_packets");
  if (r.status == AccountingStatus::kStart) {
    auto nonzero = [](const std::optional<std::int64_t>& v) {
      return v.has_value() && *v != 0;
    };
    if (nonzero(r.session_time) || nonzero(r.input_octets) ||
        nonzero(r.output_octets) || nonzero(r.input_packets) ||
        nonzero(r.output_packets)) {
      throw std::invalid_argument("counters on Start record");
    }
  }
  return r;
}

std::string optional_field(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

int status_rank(AccountingStatus s) { return static_cast<int>(s); }

auto record_key(const AccountingRecord& r) {
  return std::make_tuple(r.event_time(), status_rank(r.status),
                         std::cref(r.session_id), r.timestamp,
                         std::cref(r.called_station),
                         std::cref(r.calling_station), r.delay_time,
                         r.session_time, r.input_octets, r.output_octets,
                         r.input_packets, r.output_packets);
}

}  // namespace

std::string_view to_string(AccountingStatus status) {
  switch (status) {
    case AccountingStatus::kStart:
      return "Start";
    case AccountingStatus::kAlive:
      return "Alive";
    case AccountingStatus::kStop:
      return "Stop";
  }
  return "?";
}

std::int64_t AccountingRecord::event_time() const {
  const std::int64_t delay = delay_time.value_or(0);
  return delay > timestamp ? 0 : timestamp - delay;
}

ParseResult parse_trace(std::istream& in) {
  if (!in) throw std::runtime_error("trace stream is not readable");
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kTraceHeader) {
        throw std::runtime_error(
            fmt::format("line {}: expected trace header '{}'", line_no, kTraceHeader));
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    try {
      result.records.push_back(parse_line(line));
    } catch (const std::invalid_argument& e) {
      result.issues.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw std::runtime_error("error while reading trace");
  if (!header_seen) throw std::runtime_error("trace is empty; header row required");
  return result;
}

ParseResult parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open trace '{}'", path));
  try {
    return parse_trace(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
}

std::string format_record(const AccountingRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", to_string(r.status),
                     r.session_id, optional_field(r.session_time),
                     optional_field(r.delay_time), r.called_station,
                     r.calling_station, r.timestamp,
                     optional_field(r.input_octets),
                     optional_field(r.output_octets),
                     optional_field(r.input_packets),
                     optional_field(r.output_packets));
}

void write_trace(std::ostream& out, std::span<const AccountingRecord> records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
}

CounterSnapshot Session::final_counters() const {
  if (snapshots.empty()) return CounterSnapshot{end_time, 0, 0, 0, 0};
  return snapshots.back();
}

std::vector<CounterSnapshot> counter_deltas(const Session& session) {
  std::vector<CounterSnapshot> out;
  out.reserve(session.snapshots.size());
  CounterSnapshot prev{};
  auto delta = [](std::int64_t now, std::int64_t before) {
    return now >= before ? now - before : now;
  };
  for (const auto& s : session.snapshots) {
    out.push_back({s.event_time, delta(s.input_octets, prev.input_octets),
                   delta(s.output_octets, prev.output_octets),
                   delta(s.input_packets, prev.input_packets),
                   delta(s.output_packets, prev.output_packets)});
    prev = s;
  }
  return out;
}

SessionizeResult sessionize(std::span<const AccountingRecord> records) {
  std::vector<const AccountingRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const AccountingRecord* a, const AccountingRecord* b) {
              return record_key(*a) < record_key(*b);
            });

  SessionizeResult result;
  std::set<std::tuple<std::string_view, int, std::int64_t>> seen;
  std::map<std::string_view, std::vector<const AccountingRecord*>> groups;
  for (const AccountingRecord* r : sorted) {
    if (!seen.emplace(r->session_id, status_rank(r->status), r->timestamp).second) {
      result.issues.push_back({r->session_id, "duplicate"});
      continue;
    }
    groups[r->session_id].push_back(r);
  }

  for (const auto& [id, group] : groups) {
    Session s;
    s.session_id = std::string(id);
    const AccountingRecord* start = nullptr;
    const AccountingRecord* stop = nullptr;
    std::int64_t first_event = group.front()->event_time();
    std::int64_t last_event = group.front()->event_time();
    for (const AccountingRecord* r : group) {
      first_event = std::min(first_event, r->event_time());
      last_event = std::max(last_event, r->event_time());
      if (r->status == AccountingStatus::kStart) {
        if (start) {
          result.issues.push_back({s.session_id, "duplicate start"});
          continue;
        }
        start = r;
      } else {
        if (r->status == AccountingStatus::kStop) {
          if (stop) {
            result.issues.push_back({s.session_id, "duplicate stop"});
            continue;
          }
          stop = r;
        }
        const bool has_counters = r->input_octets || r->output_octets ||
                                  r->input_packets || r->output_packets;
        if (has_counters) {
          s.snapshots.push_back({r->event_time(), r->input_octets.value_or(0),
                                 r->output_octets.value_or(0),
                                 r->input_packets.value_or(0),
                                 r->output_packets.value_or(0)});
        }
      }
    }
    const AccountingRecord* identity = start ? start : group.front();
    s.client = identity->calling_station;
    s.ap = identity->called_station;
    s.start_time = first_event;
    if (!start) {
      s.synthesized_start = true;
      result.issues.push_back({s.session_id, "missing start"});
    } else if (stop && stop->event_time() < start->event_time()) {
      result.issues.push_back({s.session_id, "stop before start"});
    }
    s.end_time = last_event;
    s.open = stop == nullptr;
    for (std::size_t i = 1; i < s.snapshots.size(); ++i) {
      const auto& a = s.snapshots[i - 1];
      const auto& b = s.snapshots[i];
      if (b.input_octets < a.input_octets || b.output_octets < a.output_octets ||
          b.input_packets < a.input_packets || b.output_packets < a.output_packets) {
        result.issues.push_back({s.session_id, "counter reset"});
        break;
      }
    }
    result.sessions.push_back(std::move(s));
  }
  std::sort(result.sessions.begin(), result.sessions.end(),
            [](const Session& a, const Session& b) {
              return std::tie(a.start_time, a.session_id) <
                     std::tie(b.start_time, b.session_id);
            });
  std::sort(result.issues.begin(), result.issues.end(),
            [](const SessionIssue& a, const SessionIssue& b) {
              return std::tie(a.session_id, a.reason) < std::tie(b.session_id, b.reason);
            });
  return result;
}

void write_sessions(std::ostream& out, std::span<const Session> sessions) {
  out << "session_id,client,ap,start_time,end_time,open,synthesized_start,"
         "input_octets,output_octets,input_packets,output_packets\n";
  for (const auto& s : sessions) {
    const CounterSnapshot c = s.final_counters();
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.session_id,
                       s.client, s.ap, s.start_time, s.end_time, s.open ? 1 : 0,
                       s.synthesized_start ? 1 : 0, c.input_octets,
                       c.output_octets, c.input_packets, c.output_packets);
  }
}

}  // namespace wlanad
