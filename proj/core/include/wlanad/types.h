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
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wlanad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr std::int64_t kSlotSeconds = 900;
inline constexpr std::int64_t kDaySeconds = 86400;

// Raised when a model is asked to score features produced by a different
// standardizer/PCA pipeline than the one it was trained under.
class FingerprintMismatch : public std::runtime_error {
 public:
  FingerprintMismatch(const std::string& expected, const std::string& actual)
      : std::runtime_error("pipeline fingerprint mismatch: model expects '" +
                           expected + "', features carry '" + actual + "'"),
        expected_(expected),
        actual_(actual) {}

  const std::string& expected() const { return expected_; }
  const std::string& actual() const { return actual_; }

 private:
  std::string expected_;
  std::string actual_;
};

}  // namespace wlanad
