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
#include "wlanad/features.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "json_util.h"
#include "wlanad/gaussian.h"
#include "wlanad/timeutil.h"

namespace wlanad {
namespace {

using internal::Json;

constexpr int kPipelineVersion = 1;

void check_aligned(std::int64_t t, std::string_view what) {
  if (t % kSlotSeconds != 0) {
    throw std::invalid_argument(
        fmt::format("{} {} is not a multiple of {} s", what, t, kSlotSeconds));
  }
}

// Index range [first, last] of the buckets of size step (offset origin) that
// the interval [start, end) touches; a zero-length interval touches the
// bucket containing start.
std::pair<std::int64_t, std::int64_t> bucket_range(std::int64_t start,
                                                   std::int64_t end,
                                                   std::int64_t origin,
                                                   std::int64_t step) {
  const std::int64_t first = floor_to(start - origin, step) / step;
  const std::int64_t last_point = end > start ? end - 1 : start;
  const std::int64_t last = floor_to(last_point - origin, step) / step;
  return {first, last};
}

std::int64_t overlap_seconds(std::int64_t a0, std::int64_t a1, std::int64_t b0,
                             std::int64_t b1) {
  return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

std::array<double, kRawFeatureCount> SlotFeatures::values() const {
  return {static_cast<double>(user_count),    static_cast<double>(session_count),
          connection_duration,                static_cast<double>(input_octets),
          static_cast<double>(output_octets), static_cast<double>(input_packets),
          static_cast<double>(output_packets)};
}

bool WorkingHours::contains(std::int64_t slot_start) const {
  const std::int64_t local = slot_start + utc_offset_seconds;
  if (weekday(local) >= 5) return false;
  const CivilTime t = to_civil(local);
  return t.hour >= start_hour && t.hour < end_hour;
}

std::vector<SlotFeatures> aggregate(std::span<const Session> sessions,
                                    std::string_view ap,
                                    std::int64_t window_start,
                                    std::int64_t window_end,
                                    const AggregateOptions& options) {
  check_aligned(window_start, "window start");
  check_aligned(window_end, "window end");
  if (window_end < window_start) {
    throw std::invalid_argument("window end precedes window start");
  }
  const auto slot_count =
      static_cast<std::size_t>((window_end - window_start) / kSlotSeconds);
  std::vector<SlotFeatures> slots(slot_count);
  std::vector<std::set<std::string_view>> users(slot_count);
  for (std::size_t i = 0; i < slot_count; ++i) {
    slots[i].ap = std::string(ap);
    slots[i].slot_start = window_start + static_cast<std::int64_t>(i) * kSlotSeconds;
  }
  const auto n = static_cast<std::int64_t>(slot_count);

  for (const Session& s : sessions) {
    if (s.ap != ap) continue;
    const auto [first, last] =
        bucket_range(s.start_time, s.end_time, window_start, kSlotSeconds);
    for (std::int64_t i = std::max<std::int64_t>(first, 0);
         i <= std::min(last, n - 1); ++i) {
      auto& slot = slots[static_cast<std::size_t>(i)];
      const std::int64_t slot_end = slot.slot_start + kSlotSeconds;
      slot.connection_duration +=
          static_cast<double>(overlap_seconds(s.start_time, s.end_time,
                                              slot.slot_start, slot_end)) /
          60.0;
      slot.session_count += 1;
      users[static_cast<std::size_t>(i)].insert(s.client);
    }
    for (const CounterSnapshot& d : counter_deltas(s)) {
      if (d.event_time < window_start || d.event_time >= window_end) continue;
      auto& slot =
          slots[static_cast<std::size_t>((d.event_time - window_start) / kSlotSeconds)];
      slot.input_octets += d.input_octets;
      slot.output_octets += d.output_octets;
      slot.input_packets += d.input_packets;
      slot.output_packets += d.output_packets;
    }
  }
  for (std::size_t i = 0; i < slot_count; ++i) {
    slots[i].user_count = static_cast<std::int64_t>(users[i].size());
  }
  if (options.working_hours) {
    std::erase_if(slots, [&](const SlotFeatures& f) {
      return !options.working_hours->contains(f.slot_start);
    });
  }
  return slots;
}

std::vector<SlotFeatures> fill_gaps(std::span<const SlotFeatures> slots,
                                    std::string_view ap,
                                    std::int64_t window_start,
                                    std::int64_t window_end) {
  check_aligned(window_start, "window start");
  check_aligned(window_end, "window end");
  std::map<std::int64_t, const SlotFeatures*> by_start;
  for (const auto& s : slots) {
    if (s.ap == ap) by_start[s.slot_start] = &s;
  }
  std::vector<SlotFeatures> out;
  for (std::int64_t t = window_start; t < window_end; t += kSlotSeconds) {
    auto it = by_start.find(t);
    if (it != by_start.end()) {
      out.push_back(*it->second);
    } else {
      SlotFeatures empty;
      empty.ap = std::string(ap);
      empty.slot_start = t;
      out.push_back(std::move(empty));
    }
  }
  return out;
}

Matrix to_matrix(std::span<const SlotFeatures> slots) {
  Matrix m(static_cast<Eigen::Index>(slots.size()), kRawFeatureCount);
  for (std::size_t r = 0; r < slots.size(); ++r) {
    const auto v = slots[r].values();
    for (int c = 0; c < kRawFeatureCount; ++c) {
      m(static_cast<Eigen::Index>(r), c) = v[static_cast<std::size_t>(c)];
    }
  }
  return m;
}

void write_features_csv(std::ostream& out, std::span<const SlotFeatures> slots) {
  out << "ap,slot_start";
  for (auto name : kRawFeatureNames) out << ',' << name;
  out << '\n';
  for (const auto& s : slots) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", s.ap,
                       format_iso8601(s.slot_start), s.user_count,
                       s.session_count, s.connection_duration, s.input_octets,
                       s.output_octets, s.input_packets, s.output_packets);
  }
}

std::vector<SlotFeatures> read_features_csv(std::istream& in) {
  std::vector<SlotFeatures> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line.rfind("ap,slot_start", 0) != 0) {
        throw std::runtime_error("line 1: expected features header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 2 + kRawFeatureCount) {
      throw std::runtime_error(fmt::format("line {}: expected {} fields", line_no,
                                           2 + kRawFeatureCount));
    }
    try {
      SlotFeatures s;
      s.ap = f[0];
      s.slot_start = parse_iso8601(f[1]);
      s.user_count = std::stoll(f[2]);
      s.session_count = std::stoll(f[3]);
      s.connection_duration = std::stod(f[4]);
      s.input_octets = std::stoll(f[5]);
      s.output_octets = std::stoll(f[6]);
      s.input_packets = std::stoll(f[7]);
      s.output_packets = std::stoll(f[8]);
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const Matrix& raw) {
  if (raw.rows() < 2) {
    throw std::invalid_argument("standardizer needs at least two rows");
  }
  Standardizer s;
  s.input_columns_ = static_cast<int>(raw.cols());
  const double n = static_cast<double>(raw.rows());
  std::vector<double> means, sds;
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double mean = raw.col(c).mean();
    const double ss = (raw.col(c).array() - mean).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      s.dropped_.push_back(static_cast<int>(c));
      continue;
    }
    s.retained_.push_back(static_cast<int>(c));
    means.push_back(mean);
    sds.push_back(sd);
  }
  if (s.retained_.empty()) {
    throw std::invalid_argument("every column has zero variance");
  }
  s.means_ = Eigen::Map<const Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
  s.sds_ = Eigen::Map<const Vector>(sds.data(), static_cast<Eigen::Index>(sds.size()));
  return s;
}

Standardizer Standardizer::from_parts(int input_columns, std::vector<int> retained,
                                      Vector means, Vector sds) {
  if (retained.size() != static_cast<std::size_t>(means.size()) ||
      means.size() != sds.size()) {
    throw std::invalid_argument("standardizer parts disagree in length");
  }
  Standardizer s;
  s.input_columns_ = input_columns;
  std::vector<bool> kept(static_cast<std::size_t>(input_columns), false);
  for (int c : retained) {
    if (c < 0 || c >= input_columns) {
      throw std::invalid_argument("retained column out of range");
    }
    kept[static_cast<std::size_t>(c)] = true;
  }
  for (int c = 0; c < input_columns; ++c) {
    if (!kept[static_cast<std::size_t>(c)]) s.dropped_.push_back(c);
  }
  if ((sds.array() <= 0.0).any()) {
    throw std::invalid_argument("standard deviations must be positive");
  }
  s.retained_ = std::move(retained);
  s.means_ = std::move(means);
  s.sds_ = std::move(sds);
  return s;
}

Matrix Standardizer::apply(const Matrix& raw) const {
  if (raw.cols() != input_columns_) {
    throw std::invalid_argument(fmt::format(
        "standardizer expects {} columns, got {}", input_columns_, raw.cols()));
  }
  Matrix out(raw.rows(), static_cast<Eigen::Index>(retained_.size()));
  for (std::size_t j = 0; j < retained_.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.col(jj) = (raw.col(retained_[j]).array() - means_(jj)) / sds_(jj);
  }
  return out;
}

PcaProjection PcaProjection::fit(const Matrix& standardized, int k) {
  const auto d = standardized.cols();
  if (k < 1 || k > d) {
    throw std::invalid_argument(
        fmt::format("PCA k={} must be within [1, {}]", k, d));
  }
  if (standardized.rows() < 2) {
    throw std::invalid_argument("PCA needs at least two rows");
  }
  const Matrix cov = sample_covariance(standardized, /*unbiased=*/true);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("covariance eigendecomposition failed");
  }
  PcaProjection p;
  p.k_ = k;
  p.loadings_.resize(d, d);
  p.eigenvalues_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index src = d - 1 - i;
    p.eigenvalues_(i) = std::max(0.0, eig.eigenvalues()(src));
    Vector v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    p.loadings_.col(i) = v;
  }
  const double trace = p.eigenvalues_.sum();
  if (!(trace > 0.0)) throw std::invalid_argument("PCA input has no variance");
  p.explained_ = p.eigenvalues_ / trace;
  return p;
}

PcaProjection PcaProjection::from_parts(Matrix loadings, Vector eigenvalues,
                                        Vector explained, int k) {
  if (loadings.rows() != loadings.cols() || loadings.cols() != explained.size() ||
      eigenvalues.size() != explained.size() || k < 1 || k > loadings.cols()) {
    throw std::invalid_argument("PCA parts disagree in shape");
  }
  PcaProjection p;
  p.loadings_ = std::move(loadings);
  p.eigenvalues_ = std::move(eigenvalues);
  p.explained_ = std::move(explained);
  p.k_ = k;
  return p;
}

Matrix PcaProjection::project(const Matrix& standardized) const {
  if (standardized.cols() != loadings_.rows()) {
    throw std::invalid_argument("projection input has the wrong column count");
  }
  return standardized * loadings_.leftCols(k_);
}

Matrix PcaProjection::project_all(const Matrix& standardized) const {
  return standardized * loadings_;
}

Matrix PcaProjection::reconstruct(const Matrix& scores) const {
  return scores * loadings_.leftCols(scores.cols()).transpose();
}

double PcaProjection::cumulative_explained(int components) const {
  return explained_.head(std::min<Eigen::Index>(components, explained_.size())).sum();
}

FeaturePipeline::FeaturePipeline(Standardizer standardizer, PcaProjection pca)
    : standardizer_(std::move(standardizer)), pca_(std::move(pca)) {
  if (pca_.loadings().rows() !=
      static_cast<Eigen::Index>(standardizer_.retained_columns().size())) {
    throw std::invalid_argument("PCA dimension does not match the standardizer");
  }
  Json doc = internal::parse_json(to_json(), "pipeline");
  doc.erase("fingerprint");
  fingerprint_ = internal::hex64(internal::fnv1a64(doc.dump()));
}

FeaturePipeline FeaturePipeline::fit(const Matrix& raw, int k) {
  Standardizer s = Standardizer::fit(raw);
  PcaProjection p = PcaProjection::fit(s.apply(raw), k);
  return FeaturePipeline(std::move(s), std::move(p));
}

Matrix FeaturePipeline::transform(const Matrix& raw) const {
  return pca_.project(standardizer_.apply(raw));
}

std::string FeaturePipeline::to_json() const {
  Json doc;
  doc["version"] = kPipelineVersion;
  doc["input_columns"] = standardizer_.input_columns();
  doc["retained_columns"] = standardizer_.retained_columns();
  doc["means"] = internal::to_json(standardizer_.means());
  doc["sds"] = internal::to_json(standardizer_.sds());
  doc["k"] = pca_.k();
  doc["loadings"] = internal::to_json(pca_.loadings());
  doc["eigenvalues"] = internal::to_json(pca_.eigenvalues());
  doc["explained_variance"] = internal::to_json(pca_.explained_variance());
  if (!fingerprint_.empty()) doc["fingerprint"] = fingerprint_;
  return doc.dump(2);
}

FeaturePipeline FeaturePipeline::from_json(std::string_view text) {
  const Json doc = internal::parse_json(text, "pipeline");
  const int version = internal::require(doc, "version").get<int>();
  if (version != kPipelineVersion) {
    throw std::runtime_error(fmt::format("unsupported pipeline version {}", version));
  }
  Standardizer s = Standardizer::from_parts(
      internal::require(doc, "input_columns").get<int>(),
      internal::require(doc, "retained_columns").get<std::vector<int>>(),
      internal::vector_from_json(internal::require(doc, "means"), "means"),
      internal::vector_from_json(internal::require(doc, "sds"), "sds"));
  PcaProjection p = PcaProjection::from_parts(
      internal::matrix_from_json(internal::require(doc, "loadings"), "loadings"),
      internal::vector_from_json(internal::require(doc, "eigenvalues"), "eigenvalues"),
      internal::vector_from_json(internal::require(doc, "explained_variance"),
                                 "explained_variance"),
      internal::require(doc, "k").get<int>());
  FeaturePipeline pipeline(std::move(s), std::move(p));
  if (auto it = doc.find("fingerprint"); it != doc.end()) {
    if (it->get<std::string>() != pipeline.fingerprint()) {
      throw std::runtime_error("pipeline fingerprint does not match its parameters");
    }
  }
  return pipeline;
}

FeatureSeries project(const FeaturePipeline& pipeline,
                      std::span<const SlotFeatures> slots) {
  FeatureSeries series;
  series.fingerprint = pipeline.fingerprint();
  if (!slots.empty()) series.ap = slots.front().ap;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i > 0 && slots[i].slot_start != slots[i - 1].slot_start + kSlotSeconds) {
      throw std::invalid_argument(fmt::format(
          "slot {} does not follow its predecessor by {} s; fill gaps first",
          format_iso8601(slots[i].slot_start), kSlotSeconds));
    }
    series.slot_starts.push_back(slots[i].slot_start);
  }
  series.values = slots.empty() ? Matrix(0, pipeline.pca().k())
                                : pipeline.transform(to_matrix(slots));
  return series;
}

void write_projection_csv(std::ostream& out, const FeatureSeries& series) {
  out << "ap,slot_start";
  for (Eigen::Index c = 0; c < series.values.cols(); ++c) out << ",pc" << c + 1;
  out << '\n';
  for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
    out << series.ap << ','
        << format_iso8601(series.slot_starts[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
      out << ',' << fmt::format("{}", series.values(r, c));
    }
    out << '\n';
  }
}

CorrelationMatrix correlation_matrix(const Matrix& raw) {
  if (raw.rows() < 2) {
    throw std::invalid_argument("correlation needs at least two rows");
  }
  const auto d = raw.cols();
  const Matrix centered = raw.rowwise() - raw.colwise().mean();
  Vector norms(d);
  for (Eigen::Index c = 0; c < d; ++c) norms(c) = centered.col(c).norm();
  CorrelationMatrix out(static_cast<std::size_t>(d),
                        std::vector<std::optional<double>>(static_cast<std::size_t>(d)));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(norms(i) > 0.0) || !(norms(j) > 0.0)) continue;
      double r = i == j ? 1.0
                        : centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
      r = std::clamp(r, -1.0, 1.0);
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r;
    }
  }
  return out;
}

XYTable empirical_cdf(std::span<const double> values) {
  XYTable t;
  if (values.empty()) return t;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    t.x.push_back(sorted[i]);
    t.y.push_back(static_cast<double>(i + 1) / n);
  }
  t.y.back() = 1.0;
  return t;
}

XYTable moving_average(std::span<const double> values, int window) {
  if (window < 1) throw std::invalid_argument("moving average window must be >= 1");
  XYTable t;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - static_cast<std::size_t>(window)];
    const std::size_t count = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    t.x.push_back(static_cast<double>(i));
    t.y.push_back(sum / static_cast<double>(count));
  }
  return t;
}

namespace {

// Sessions per (client, ap, bucket), ordered by bucket then client then ap.
std::vector<double> sessions_per_user(std::span<const Session> sessions,
                                      std::int64_t bucket_seconds,
                                      std::int64_t offset) {
  std::map<std::tuple<std::int64_t, std::string_view, std::string_view>, std::int64_t>
      counts;
  for (const Session& s : sessions) {
    const auto [first, last] = bucket_range(s.start_time + offset,
                                            s.end_time + offset, 0, bucket_seconds);
    for (std::int64_t b = first; b <= last; ++b) {
      counts[{b, s.client, s.ap}] += 1;
    }
  }
  std::vector<double> out;
  out.reserve(counts.size());
  for (const auto& [key, n] : counts) out.push_back(static_cast<double>(n));
  return out;
}

}  // namespace

UsageStatistics usage_statistics(std::span<const Session> sessions,
                                 const UsageOptions& options) {
  UsageStatistics stats;
  if (sessions.empty()) return stats;
  const std::int64_t off = options.utc_offset_seconds;

  const auto hourly = sessions_per_user(sessions, 3600, off);
  stats.sessions_per_user_hourly_ma = moving_average(hourly, options.moving_average_window);
  stats.sessions_per_user_hourly_cdf = empirical_cdf(hourly);
  const auto daily = sessions_per_user(sessions, kDaySeconds, off);
  stats.sessions_per_user_daily_ma = moving_average(daily, options.moving_average_window);
  stats.sessions_per_user_daily_cdf = empirical_cdf(daily);

  // Per AP and local day: distinct users, sessions, per-user minutes.
  struct DayUsage {
    std::set<std::string_view> users;
    std::int64_t sessions = 0;
    std::map<std::string_view, double> minutes;
  };
  std::map<std::string_view, std::map<std::int64_t, DayUsage>> per_ap;
  for (const Session& s : sessions) {
    const std::int64_t start = s.start_time + off;
    const std::int64_t end = s.end_time + off;
    const auto [first, last] = bucket_range(start, end, 0, kDaySeconds);
    for (std::int64_t d = first; d <= last; ++d) {
      DayUsage& u = per_ap[s.ap][d];
      u.users.insert(s.client);
      u.sessions += 1;
      u.minutes[s.client] += static_cast<double>(overlap_seconds(
                                 start, end, d * kDaySeconds, (d + 1) * kDaySeconds)) /
                             60.0;
    }
  }
  std::vector<double> users_per_ap, sessions_per_ap, duration_per_ap_day;
  for (const auto& [ap, days] : per_ap) {
    double users = 0.0, sess = 0.0;
    for (const auto& [day, u] : days) {
      users += static_cast<double>(u.users.size());
      sess += static_cast<double>(u.sessions);
      double total = 0.0;
      for (const auto& [client, minutes] : u.minutes) total += minutes;
      duration_per_ap_day.push_back(total / static_cast<double>(u.minutes.size()));
    }
    users_per_ap.push_back(users / static_cast<double>(days.size()));
    sessions_per_ap.push_back(sess / static_cast<double>(days.size()));
  }
  stats.per_ap_user_cdf = empirical_cdf(users_per_ap);
  stats.per_ap_session_cdf = empirical_cdf(sessions_per_ap);
  stats.per_ap_daily_duration_cdf = empirical_cdf(duration_per_ap_day);
  return stats;
}

void write_xy_csv(std::ostream& out, const XYTable& table, std::string_view x_name,
                  std::string_view y_name) {
  out << x_name << ',' << y_name << '\n';
  for (std::size_t i = 0; i < table.x.size(); ++i) {
    out << fmt::format("{},{}\n", table.x[i], table.y[i]);
  }
}

}  // namespace wlanad
