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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlanad/ingest.h"
#include "wlanad/types.h"

namespace wlanad {

inline constexpr int kRawFeatureCount = 7;

inline constexpr std::array<std::string_view, kRawFeatureCount>
    kRawFeatureNames = {"user_count",    "session_count", "connection_duration",
                        "input_octets",  "output_octets", "input_packets",
                        "output_packets"};

// Density and usage attributes of one AP during one 15-minute slot.
struct SlotFeatures {
  std::string ap;
  std::int64_t slot_start = 0;
  std::int64_t user_count = 0;
  std::int64_t session_count = 0;
  double connection_duration = 0.0;  // minutes
  std::int64_t input_octets = 0;
  std::int64_t output_octets = 0;
  std::int64_t input_packets = 0;
  std::int64_t output_packets = 0;

  std::array<double, kRawFeatureCount> values() const;

  friend bool operator==(const SlotFeatures&, const SlotFeatures&) = default;
};

struct WorkingHours {
  int start_hour = 8;
  int end_hour = 18;
  // Offset of local time from UTC.
  std::int64_t utc_offset_seconds = 0;

  // Monday..Friday and start_hour <= local hour < end_hour.
  bool contains(std::int64_t slot_start) const;
};

struct AggregateOptions {
  // When set, slots outside working hours are omitted.
  std::optional<WorkingHours> working_hours;
};

// One SlotFeatures per slot of [window_start, window_end) for sessions seen
// at ap. Traffic deltas land in the slot containing the reporting event.
// Throws std::invalid_argument unless both bounds are slot aligned.
std::vector<SlotFeatures> aggregate(std::span<const Session> sessions,
                                    std::string_view ap,
                                    std::int64_t window_start,
                                    std::int64_t window_end,
                                    const AggregateOptions& options = {});

// Materializes absent slots of [window_start, window_end) as zero rows.
std::vector<SlotFeatures> fill_gaps(std::span<const SlotFeatures> slots,
                                    std::string_view ap,
                                    std::int64_t window_start,
                                    std::int64_t window_end);

Matrix to_matrix(std::span<const SlotFeatures> slots);

void write_features_csv(std::ostream& out, std::span<const SlotFeatures> slots);
// Throws std::runtime_error naming the line on malformed input.
std::vector<SlotFeatures> read_features_csv(std::istream& in);

class Standardizer {
 public:
  Standardizer() = default;

  // Requires at least two rows. Zero-variance columns are dropped and listed
  // in dropped_columns().
  static Standardizer fit(const Matrix& raw);

  Matrix apply(const Matrix& raw) const;

  const Vector& means() const { return means_; }
  const Vector& sds() const { return sds_; }
  const std::vector<int>& retained_columns() const { return retained_; }
  const std::vector<int>& dropped_columns() const { return dropped_; }
  int input_columns() const { return input_columns_; }

  static Standardizer from_parts(int input_columns, std::vector<int> retained,
                                 Vector means, Vector sds);

 private:
  int input_columns_ = 0;
  std::vector<int> retained_;
  std::vector<int> dropped_;
  Vector means_;
  Vector sds_;
};

class PcaProjection {
 public:
  PcaProjection() = default;

  // Eigendecomposition of the sample covariance of standardized rows.
  // Throws std::invalid_argument when k exceeds the column count.
  static PcaProjection fit(const Matrix& standardized, int k = 3);

  // Rows times the first k loadings.
  Matrix project(const Matrix& standardized) const;
  // Rows times all loadings, and back again.
  Matrix project_all(const Matrix& standardized) const;
  Matrix reconstruct(const Matrix& scores) const;

  // Columns are unit-norm principal directions, by descending eigenvalue.
  const Matrix& loadings() const { return loadings_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  // eigenvalue / trace for every component (not only the first k).
  const Vector& explained_variance() const { return explained_; }
  double cumulative_explained(int components) const;
  int k() const { return k_; }

  static PcaProjection from_parts(Matrix loadings, Vector eigenvalues,
                                  Vector explained, int k);

 private:
  Matrix loadings_;
  Vector eigenvalues_;
  Vector explained_;
  int k_ = 0;
};

// Standardizer followed by a PCA projection; the pair fixes the feature space
// every model is trained in.
class FeaturePipeline {
 public:
  FeaturePipeline() = default;
  FeaturePipeline(Standardizer standardizer, PcaProjection pca);

  static FeaturePipeline fit(const Matrix& raw, int k = 3);

  Matrix transform(const Matrix& raw) const;

  const Standardizer& standardizer() const { return standardizer_; }
  const PcaProjection& pca() const { return pca_; }
  // Stable hash of the serialized parameters.
  const std::string& fingerprint() const { return fingerprint_; }

  std::string to_json() const;
  static FeaturePipeline from_json(std::string_view text);

 private:
  Standardizer standardizer_;
  PcaProjection pca_;
  std::string fingerprint_;
};

// Projected observation sequence of one AP over one window.
struct FeatureSeries {
  std::string ap;
  std::vector<std::int64_t> slot_starts;
  Matrix values;  // one row per slot, k columns
  std::string fingerprint;

  int length() const { return static_cast<int>(slot_starts.size()); }
};

// Slots must be strictly increasing in 900 s steps (see fill_gaps).
FeatureSeries project(const FeaturePipeline& pipeline,
                      std::span<const SlotFeatures> slots);

void write_projection_csv(std::ostream& out, const FeatureSeries& series);

// Pearson correlations; entries involving a zero-variance column are absent.
using CorrelationMatrix = std::vector<std::vector<std::optional<double>>>;
CorrelationMatrix correlation_matrix(const Matrix& raw);

struct XYTable {
  std::vector<double> x;
  std::vector<double> y;
};

// Empirical CDF: distinct sorted values against the fraction at or below.
XYTable empirical_cdf(std::span<const double> values);
// Trailing simple mean over up to window points.
XYTable moving_average(std::span<const double> values, int window = 10);

struct UsageStatistics {
  XYTable sessions_per_user_hourly_ma;
  XYTable sessions_per_user_hourly_cdf;
  XYTable sessions_per_user_daily_ma;
  XYTable sessions_per_user_daily_cdf;
  XYTable per_ap_user_cdf;
  XYTable per_ap_session_cdf;
  XYTable per_ap_daily_duration_cdf;
};

struct UsageOptions {
  int moving_average_window = 10;
  std::int64_t utc_offset_seconds = 0;
};

UsageStatistics usage_statistics(std::span<const Session> sessions,
                                 const UsageOptions& options = {});

void write_xy_csv(std::ostream& out, const XYTable& table,
                  std::string_view x_name, std::string_view y_name);

}  // namespace wlanad
