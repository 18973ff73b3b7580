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
#include <string>
#include <string_view>

namespace wlanad {

struct CivilTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
};

CivilTime to_civil(std::int64_t epoch_seconds);
std::int64_t from_civil(const CivilTime& t);

// 0 = Monday ... 6 = Sunday.
int weekday(std::int64_t epoch_seconds);

// "2015-11-02T08:00:00Z"
std::string format_iso8601(std::int64_t epoch_seconds);
// Accepts "YYYY-MM-DDTHH:MM:SS" with an optional trailing "Z" or a bare
// integer of epoch seconds. Throws std::invalid_argument otherwise.
std::int64_t parse_iso8601(std::string_view text);

// "2015-11-02"
std::string format_date(std::int64_t epoch_seconds);

// Floors towards negative infinity.
constexpr std::int64_t floor_to(std::int64_t t, std::int64_t step) {
  std::int64_t q = t / step;
  if (t % step != 0 && t < 0) --q;
  return q * step;
}

}  // namespace wlanad
