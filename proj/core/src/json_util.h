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
#include <vector>

#include "json.hpp"
#include "wlanad/types.h"

namespace wlanad::internal {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // array of rows
Vector vector_from_json(const Json& j, std::string_view field);
Matrix matrix_from_json(const Json& j, std::string_view field);

// Throws std::runtime_error naming the field when it is missing.
const Json& require(const Json& j, std::string_view field);

Json parse_json(std::string_view text, std::string_view what);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace wlanad::internal
