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
#include "json_util.h"

#include <stdexcept>

#include <fmt/format.h>

namespace wlanad::internal {

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const Json& j, std::string_view field) {
  if (!j.is_array()) {
    throw std::runtime_error(fmt::format("field '{}' must be an array", field));
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw std::runtime_error(
          fmt::format("field '{}' entry {} is not a number", field, i));
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j, std::string_view field) {
  if (!j.is_array()) {
    throw std::runtime_error(fmt::format("field '{}' must be an array", field));
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols =
      rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::runtime_error(
          fmt::format("field '{}' row {} has the wrong length", field, r));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

const Json& require(const Json& j, std::string_view field) {
  auto it = j.find(std::string(field));
  if (it == j.end()) {
    throw std::runtime_error(fmt::format("missing field '{}'", field));
  }
  return *it;
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(fmt::format("invalid {} JSON: {}", what, e.what()));
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace wlanad::internal
