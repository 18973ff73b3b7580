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
#include "wlanad/timeutil.h"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace wlanad {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  year = static_cast<int>(y + (month <= 2));
}

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("bad timestamp '{}'", whole));
  }
  return value;
}

}  // namespace

CivilTime to_civil(std::int64_t epoch_seconds) {
  const std::int64_t days = floor_to(epoch_seconds, 86400) / 86400;
  const std::int64_t rem = epoch_seconds - days * 86400;
  CivilTime t;
  civil_from_days(days, t.year, t.month, t.day);
  t.hour = static_cast<int>(rem / 3600);
  t.minute = static_cast<int>((rem % 3600) / 60);
  t.second = static_cast<int>(rem % 60);
  return t;
}

std::int64_t from_civil(const CivilTime& t) {
  return days_from_civil(t.year, static_cast<unsigned>(t.month),
                         static_cast<unsigned>(t.day)) *
             86400 +
         t.hour * 3600LL + t.minute * 60LL + t.second;
}

int weekday(std::int64_t epoch_seconds) {
  const std::int64_t days = floor_to(epoch_seconds, 86400) / 86400;
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  const CivilTime t = to_civil(epoch_seconds);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", t.year,
                     t.month, t.day, t.hour, t.minute, t.second);
}

std::string format_date(std::int64_t epoch_seconds) {
  const CivilTime t = to_civil(epoch_seconds);
  return fmt::format("{:04d}-{:02d}-{:02d}", t.year, t.month, t.day);
}

std::int64_t parse_iso8601(std::string_view text) {
  if (text.find('T') == std::string_view::npos) {
    std::int64_t value = 0;
    auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw std::invalid_argument(fmt::format("bad timestamp '{}'", text));
    }
    return value;
  }
  std::string_view s = text;
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  // YYYY-MM-DDTHH:MM:SS
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
      s[13] != ':' || s[16] != ':') {
    throw std::invalid_argument(fmt::format("bad timestamp '{}'", text));
  }
  CivilTime t;
  t.year = parse_int(s.substr(0, 4), text);
  t.month = parse_int(s.substr(5, 2), text);
  t.day = parse_int(s.substr(8, 2), text);
  t.hour = parse_int(s.substr(11, 2), text);
  t.minute = parse_int(s.substr(14, 2), text);
  t.second = parse_int(s.substr(17, 2), text);
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31 || t.hour > 23 ||
      t.minute > 59 || t.second > 60) {
    throw std::invalid_argument(fmt::format("bad timestamp '{}'", text));
  }
  return from_civil(t);
}

}  // namespace wlanad
