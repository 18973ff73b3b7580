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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "wlanad/features.h"

namespace wlanad {
namespace {

constexpr std::int64_t kMonday8 = 1446451200;  // 2015-11-02 08:00 UTC

Session session(std::string id, std::string client, std::int64_t start, std::int64_t end) {
  Session s;
  s.session_id = std::move(id);
  s.client = std::move(client);
  s.ap = "AP1";
  s.start_time = start;
  s.end_time = end;
  return s;
}

TEST(Aggregate, EmptySlotIsZero) {
  const auto slots = aggregate({}, "AP1", kMonday8, kMonday8 + 2 * kSlotSeconds);
  ASSERT_EQ(slots.size(), 2u);
  for (const auto& s : slots) {
    for (double v : s.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Aggregate, FullSlotSession) {
  const std::vector<Session> ss = {session("a", "C1", kMonday8 - 60, kMonday8 + 960)};
  const auto slots = aggregate(ss, "AP1", kMonday8, kMonday8 + kSlotSeconds);
  ASSERT_EQ(slots.size(), 1u);
  EXPECT_EQ(slots[0].user_count, 1);
  EXPECT_EQ(slots[0].session_count, 1);
  EXPECT_DOUBLE_EQ(slots[0].connection_duration, 15.0);
}

TEST(Aggregate, TwoSessionsOneUserCountBoth) {
  const std::vector<Session> ss = {session("a", "C1", kMonday8, kMonday8 + 900),
                                   session("b", "C1", kMonday8 - 100, kMonday8 + 1000)};
  const auto slots = aggregate(ss, "AP1", kMonday8, kMonday8 + kSlotSeconds);
  ASSERT_EQ(slots.size(), 1u);
  EXPECT_EQ(slots[0].user_count, 1);
  EXPECT_EQ(slots[0].session_count, 2);
  EXPECT_DOUBLE_EQ(slots[0].connection_duration, 30.0);  // 15 + 15
}

TEST(Aggregate, PartialOverlapMinutes) {
  // 08:05-08:20 touches two slots: 10 and 5 minutes.
  const std::vector<Session> ss = {session("a", "C1", kMonday8 + 300, kMonday8 + 1200)};
  const auto slots = aggregate(ss, "AP1", kMonday8, kMonday8 + 2 * kSlotSeconds);
  EXPECT_DOUBLE_EQ(slots[0].connection_duration, 10.0);
  EXPECT_DOUBLE_EQ(slots[1].connection_duration, 5.0);
  EXPECT_EQ(slots[0].session_count, 1);
  EXPECT_EQ(slots[1].session_count, 1);
}

TEST(Aggregate, TrafficGoesToReportingSlot) {
  Session s = session("a", "C1", kMonday8, kMonday8 + 1700);
  s.snapshots = {{kMonday8 + 600, 100, 1000, 1, 2}, {kMonday8 + 1700, 250, 1500, 3, 5}};
  const std::vector<Session> ss = {s};
  const auto slots = aggregate(ss, "AP1", kMonday8, kMonday8 + 2 * kSlotSeconds);
  EXPECT_EQ(slots[0].input_octets, 100);
  EXPECT_EQ(slots[0].output_octets, 1000);
  EXPECT_EQ(slots[1].input_octets, 150);
  EXPECT_EQ(slots[1].output_octets, 500);
  EXPECT_EQ(slots[1].input_packets, 2);
  EXPECT_EQ(slots[1].output_packets, 3);
}

TEST(Aggregate, OtherApIgnoredAndWindowChecked) {
  Session s = session("a", "C1", kMonday8, kMonday8 + 900);
  s.ap = "AP2";
  const std::vector<Session> ss = {s};
  EXPECT_EQ(aggregate(ss, "AP1", kMonday8, kMonday8 + 900)[0].session_count, 0);
  EXPECT_THROW(aggregate(ss, "AP1", kMonday8 + 1, kMonday8 + 900), std::invalid_argument);
}

TEST(Aggregate, WorkingHoursFilter) {
  AggregateOptions opts;
  opts.working_hours = WorkingHours{};
  // Monday 06:00 to 20:00: only 08:00-18:00 survives.
  const auto slots = aggregate({}, "AP1", kMonday8 - 7200, kMonday8 + 12 * 3600, opts);
  ASSERT_EQ(slots.size(), 40u);
  EXPECT_EQ(slots.front().slot_start, kMonday8);
  // Saturday is dropped entirely.
  const std::int64_t saturday = kMonday8 + 5 * kDaySeconds;
  EXPECT_TRUE(aggregate({}, "AP1", saturday, saturday + 3600, opts).empty());
}

std::vector<Session> random_sessions(std::mt19937_64& rng, int n, const std::string& prefix) {
  std::uniform_int_distribution<std::int64_t> start(kMonday8 - 1800, kMonday8 + 4 * 3600);
  std::uniform_int_distribution<std::int64_t> len(0, 5000);
  std::uniform_int_distribution<int> client(0, 5);
  std::uniform_int_distribution<std::int64_t> bytes(0, 5000);
  std::vector<Session> out;
  for (int i = 0; i < n; ++i) {
    const std::int64_t t0 = start(rng);
    Session s = session(prefix + std::to_string(i), "C" + std::to_string(client(rng)), t0,
                        t0 + len(rng));
    std::int64_t acc = 0;
    for (std::int64_t t = t0 + 600; t <= s.end_time; t += 600) {
      acc += bytes(rng);
      s.snapshots.push_back({t, acc, 2 * acc, acc / 7, acc / 3});
    }
    out.push_back(std::move(s));
  }
  return out;
}

TEST(Aggregate, SlotInvariants) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ss = random_sessions(rng, 30, "s");
    for (const auto& f : aggregate(ss, "AP1", kMonday8, kMonday8 + 4 * 3600)) {
      EXPECT_GE(f.session_count, f.user_count);
      EXPECT_LE(f.connection_duration, f.session_count * 15.0 + 1e-9);
      if (f.session_count == f.user_count) {
        EXPECT_LE(f.connection_duration, f.user_count * 15.0 + 1e-9);
      }
    }
  }
}

TEST(Aggregate, AdditiveOverDisjointLists) {
  std::mt19937_64 rng(8);
  const auto a = random_sessions(rng, 20, "a");
  const auto b = random_sessions(rng, 20, "b");
  std::vector<Session> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const std::int64_t w1 = kMonday8 + 4 * 3600;
  const auto fa = aggregate(a, "AP1", kMonday8, w1);
  const auto fb = aggregate(b, "AP1", kMonday8, w1);
  const auto fu = aggregate(both, "AP1", kMonday8, w1);
  for (std::size_t i = 0; i < fu.size(); ++i) {
    EXPECT_EQ(fu[i].session_count, fa[i].session_count + fb[i].session_count);
    EXPECT_NEAR(fu[i].connection_duration, fa[i].connection_duration + fb[i].connection_duration,
                1e-9);
    EXPECT_EQ(fu[i].input_octets, fa[i].input_octets + fb[i].input_octets);
    EXPECT_EQ(fu[i].output_packets, fa[i].output_packets + fb[i].output_packets);
    EXPECT_LE(fu[i].user_count, fa[i].user_count + fb[i].user_count);
  }
}

TEST(Features, FillGapsAndCsvRoundTrip) {
  SlotFeatures f;
  f.ap = "AP1";
  f.slot_start = kMonday8 + 900;
  f.user_count = 2;
  f.session_count = 3;
  f.connection_duration = 22.5;
  f.input_octets = 7;
  const std::vector<SlotFeatures> one = {f};
  const auto filled = fill_gaps(one, "AP1", kMonday8, kMonday8 + 2700);
  ASSERT_EQ(filled.size(), 3u);
  EXPECT_EQ(filled[0].session_count, 0);
  EXPECT_EQ(filled[1], f);
  std::stringstream io;
  write_features_csv(io, filled);
  EXPECT_EQ(read_features_csv(io), filled);
}

TEST(Standardizer, SampleSd) {
  Matrix raw(3, 2);
  raw << 1, 5, 2, 5, 3, 5;
  const auto st = Standardizer::fit(raw);
  EXPECT_EQ(st.dropped_columns(), std::vector<int>{1});
  const Matrix z = st.apply(raw);
  ASSERT_EQ(z.cols(), 1);
  EXPECT_NEAR(z(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(z(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(z(2, 0), 1.0, 1e-12);
  EXPECT_THROW(Standardizer::fit(Matrix::Ones(1, 2)), std::invalid_argument);
}

TEST(Standardizer, OwnDataHasZeroMean) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(4.0, 3.0);
  Matrix raw(50, 4);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = n(rng);
  const Matrix z = Standardizer::fit(raw).apply(raw);
  for (Eigen::Index c = 0; c < z.cols(); ++c) EXPECT_NEAR(z.col(c).mean(), 0.0, 1e-9);
}

TEST(Pca, PerfectCorrelationIsRankOne) {
  Matrix z(5, 2);
  z << -2, -4, -1, -2, 0, 0, 1, 2, 2, 4;
  const auto pca = PcaProjection::fit(z, 1);
  EXPECT_NEAR(pca.explained_variance()(0), 1.0, 1e-12);
  EXPECT_NEAR(pca.cumulative_explained(1), 1.0, 1e-12);
  EXPECT_THROW(PcaProjection::fit(z, 3), std::invalid_argument);
}

TEST(Pca, IdentityCovarianceSpreadsEvenly) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Matrix z(20000, 4);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n(rng);
  const auto pca = PcaProjection::fit(z, 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pca.explained_variance()(i), 0.25, 0.02);
}

TEST(Pca, MatchesJacobiOracle) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 4;
    Matrix mix(d, d);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = n(rng);
    Matrix z(200, d);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n(rng);
    z = z * mix;
    const Matrix centered = z.rowwise() - z.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(z.rows() - 1);
    const auto ev = oracle::jacobi_eigenvalues(cov);
    const double trace = cov.trace();
    const auto pca = PcaProjection::fit(z, d);
    for (int i = 0; i < d; ++i) {
      EXPECT_NEAR(pca.eigenvalues()(i), ev[static_cast<std::size_t>(i)], 1e-8 * trace);
      EXPECT_NEAR(pca.explained_variance()(i), ev[static_cast<std::size_t>(i)] / trace, 1e-9);
    }
  }
}

TEST(Pca, FullReconstruction) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  Matrix raw(60, 7);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = n(rng) * (1 + i % 7);
  const Matrix z = Standardizer::fit(raw).apply(raw);
  const auto pca = PcaProjection::fit(z, 3);
  const Matrix back = pca.reconstruct(pca.project_all(z));
  EXPECT_LT((back - z).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(pca.project(z).cols(), 3);
}

TEST(Pipeline, JsonRoundTripKeepsFingerprint) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  Matrix raw(40, 7);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = n(rng);
  const auto p = FeaturePipeline::fit(raw, 3);
  EXPECT_FALSE(p.fingerprint().empty());
  const auto q = FeaturePipeline::from_json(p.to_json());
  EXPECT_EQ(q.fingerprint(), p.fingerprint());
  EXPECT_LT((q.transform(raw) - p.transform(raw)).cwiseAbs().maxCoeff(), 1e-12);

  raw(0, 0) += 1.0;
  EXPECT_NE(FeaturePipeline::fit(raw, 3).fingerprint(), p.fingerprint());
}

TEST(Pipeline, TamperedJsonRejected) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n;
  Matrix raw(40, 7);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = n(rng);
  std::string json = FeaturePipeline::fit(raw, 3).to_json();
  const auto pos = json.find("\"fingerprint\"");
  ASSERT_NE(pos, std::string::npos);
  const auto quote = json.find('"', json.find(':', pos) + 1);
  json[quote + 1] = json[quote + 1] == '0' ? '1' : '0';
  EXPECT_THROW(FeaturePipeline::from_json(json), std::runtime_error);
}

TEST(Correlation, KnownEntries) {
  Matrix raw(5, 4);
  for (int i = 0; i < 5; ++i) {
    const double users = 1 + (i * 3) % 5;
    raw(i, 0) = users;
    raw(i, 1) = 2 * users;  // sessions = 2 x users
    raw(i, 2) = -users;
    raw(i, 3) = 7.0;
  }
  const auto c = correlation_matrix(raw);
  EXPECT_DOUBLE_EQ(*c[0][0], 1.0);
  EXPECT_NEAR(*c[0][1], 1.0, 1e-12);
  EXPECT_NEAR(*c[0][2], -1.0, 1e-12);
  EXPECT_FALSE(c[0][3].has_value());
  EXPECT_FALSE(c[3][3].has_value());
  EXPECT_EQ(c[1][0], c[0][1]);
}

TEST(Usage, HourLongSessionIsOnePerUser) {
  const std::vector<Session> ss = {session("a", "C1", kMonday8, kMonday8 + 3600)};
  const auto st = usage_statistics(ss);
  ASSERT_EQ(st.sessions_per_user_hourly_cdf.x, std::vector<double>{1.0});
  EXPECT_EQ(st.sessions_per_user_hourly_cdf.y, std::vector<double>{1.0});
}

TEST(Usage, SeventyPercentSingleSession) {
  std::vector<Session> ss;
  for (int u = 0; u < 10; ++u) {
    const std::string c = "C" + std::to_string(u);
    const std::int64_t t = kMonday8 + u * 600;
    ss.push_back(session(c + "a", c, t, t + 1800));
    if (u >= 7) ss.push_back(session(c + "b", c, t + 7200, t + 9000));
  }
  const auto cdf = usage_statistics(ss).sessions_per_user_daily_cdf;
  ASSERT_EQ(cdf.x, (std::vector<double>{1.0, 2.0}));
  EXPECT_NEAR(cdf.y[0], 0.70, 1e-12);
  EXPECT_DOUBLE_EQ(cdf.y[1], 1.0);
}

TEST(Usage, CdfsMonotoneEndingAtOne) {
  std::mt19937_64 rng(12);
  const auto st = usage_statistics(random_sessions(rng, 80, "s"));
  for (const XYTable* t : {&st.sessions_per_user_hourly_cdf, &st.sessions_per_user_daily_cdf,
                           &st.per_ap_user_cdf, &st.per_ap_session_cdf,
                           &st.per_ap_daily_duration_cdf}) {
    ASSERT_FALSE(t->y.empty());
    EXPECT_DOUBLE_EQ(t->y.back(), 1.0);
    for (std::size_t i = 1; i < t->y.size(); ++i) {
      EXPECT_GE(t->y[i], t->y[i - 1]);
      EXPECT_GT(t->x[i], t->x[i - 1]);
    }
  }
  EXPECT_TRUE(usage_statistics({}).per_ap_user_cdf.x.empty());
}

TEST(Usage, MovingAverageUsesPartialWindows) {
  const std::vector<double> v = {2, 4, 6, 8};
  const auto ma = moving_average(v, 2);
  EXPECT_EQ(ma.y, (std::vector<double>{2, 3, 5, 7}));
  EXPECT_THROW(moving_average(v, 0), std::invalid_argument);
}

}  // namespace
}  // namespace wlanad
