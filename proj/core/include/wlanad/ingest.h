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
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wlanad {

enum class AccountingStatus { kStart, kAlive, kStop };

std::string_view to_string(AccountingStatus status);

// One row of the RADIUS accounting table. Optional fields are absent when the
// corresponding CSV cell is empty.
struct AccountingRecord {
  AccountingStatus status = AccountingStatus::kStart;
  std::string session_id;
  std::optional<std::int64_t> session_time;
  std::optional<std::int64_t> delay_time;
  std::string called_station;   // AP
  std::string calling_station;  // client
  std::int64_t timestamp = 0;
  std::optional<std::int64_t> input_octets;
  std::optional<std::int64_t> output_octets;
  std::optional<std::int64_t> input_packets;
  std::optional<std::int64_t> output_packets;

  // timestamp - delay_time, clamped at zero.
  std::int64_t event_time() const;

  friend bool operator==(const AccountingRecord&,
                         const AccountingRecord&) = default;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct ParseResult {
  std::vector<AccountingRecord> records;
  std::vector<ParseIssue> issues;
};

inline constexpr std::string_view kTraceHeader =
    "status,session_id,session_time,delay_time,called_station,"
    "calling_station,timestamp,input_octets,output_octets,input_packets,"
    "output_packets";

// Parses the accounting CSV. Malformed data lines become issues; a missing
// or wrong header and an unreadable stream throw std::runtime_error.
ParseResult parse_trace(std::istream& in);
ParseResult parse_trace_file(const std::string& path);

void write_trace(std::ostream& out, std::span<const AccountingRecord> records);
std::string format_record(const AccountingRecord& record);

// Cumulative counters reported by an Alive or Stop record.
struct CounterSnapshot {
  std::int64_t event_time = 0;
  std::int64_t input_octets = 0;
  std::int64_t output_octets = 0;
  std::int64_t input_packets = 0;
  std::int64_t output_packets = 0;

  friend bool operator==(const CounterSnapshot&,
                         const CounterSnapshot&) = default;
};

struct Session {
  std::string session_id;
  std::string client;
  std::string ap;
  std::int64_t start_time = 0;
  std::int64_t end_time = 0;
  // No Stop was seen; end_time is the last observed event.
  bool open = false;
  // No Start was seen; start_time is the first observed event.
  bool synthesized_start = false;
  std::vector<CounterSnapshot> snapshots;

  // Last reported cumulative counters, or zeros.
  CounterSnapshot final_counters() const;

  friend bool operator==(const Session&, const Session&) = default;
};

// Per-report traffic increments. A counter that decreases is treated as a
// reset and contributes its new absolute value.
std::vector<CounterSnapshot> counter_deltas(const Session& session);

struct SessionIssue {
  std::string session_id;
  std::string reason;

  friend bool operator==(const SessionIssue&, const SessionIssue&) = default;
};

struct SessionizeResult {
  std::vector<Session> sessions;
  std::vector<SessionIssue> issues;
};

// Groups records into sessions. The output does not depend on input order.
SessionizeResult sessionize(std::span<const AccountingRecord> records);

void write_sessions(std::ostream& out, std::span<const Session> sessions);

}  // namespace wlanad
