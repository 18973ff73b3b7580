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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.h"
#include "config.h"
#include "pipeline.h"
#include "wlanad/detect.h"
#include "wlanad/hmm.h"

namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned = {"wlanad"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  return wlanad::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* env = std::getenv("WLANAD_TEST_TMP");
    const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "wlanad_cli_tests";
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = base / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // A small corpus, its features and models trained with the default flags.
  void small_corpus() {
    ASSERT_EQ(run({"simulate", "--seed", "3", "--normal-days", "4", "--abnormal-days", "2",
                   "--out", path("corpus")}),
              0);
    std::vector<std::string> args = {"featurize"};
    for (const auto& e : fs::directory_iterator(dir_ / "corpus")) {
      if (e.path().extension() == ".csv") {
        args.push_back("--trace");
        args.push_back(e.path().string());
      }
    }
    args.push_back("--out");
    args.push_back(path("features.csv"));
    std::vector<char*> argv = {const_cast<char*>("wlanad")};
    for (auto& a : args) argv.push_back(a.data());
    ASSERT_EQ(wlanad::cli::run(static_cast<int>(argv.size()), argv.data()), 0);
    ASSERT_EQ(run({"train-gmm", "--features", path("features.csv"), "--out", path("models")}), 0);
    ASSERT_EQ(run({"train-hmm", "--features", path("features.csv"), "--pipeline",
                   path("models/pipeline.json"), "--out", path("models")}),
              0);
  }

  fs::path dir_;
};

TEST_F(Cli, ConfigDefaults) {
  const wlanad::cli::PipelineConfig c;
  EXPECT_EQ(c.hmm_states, 3);
  EXPECT_EQ(c.hmm_max_iter, 20);
  EXPECT_EQ(c.hmm_tol, 1e-6);
  EXPECT_EQ(c.gmm_components, 3);
  EXPECT_EQ(c.pca_components, 3);
  EXPECT_EQ(c.gmm_threshold, 0.6);
  EXPECT_EQ(c.hmm_threshold, -10.0);
  EXPECT_FALSE(c.working_hours);
  EXPECT_EQ(c.working_hours_start, 8);
  EXPECT_EQ(c.working_hours_end, 18);
  const auto back = wlanad::cli::PipelineConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST_F(Cli, TrainHmmDefaultsAndExplicitFlagsAgree) {
  small_corpus();
  ASSERT_EQ(run({"train-hmm", "--states", "3", "--max-iter", "20", "--tol", "1e-6", "--features",
                 path("features.csv"), "--pipeline", path("models/pipeline.json"), "--out",
                 path("explicit")}),
            0);
  EXPECT_EQ(slurp(path("models/hmm.json")), slurp(path("explicit/hmm.json")));
  const auto m = wlanad::HmmModel::from_json(slurp(path("models/hmm.json")));
  EXPECT_EQ(m.states(), 3);
  EXPECT_EQ(m.dim(), 3);
}

TEST_F(Cli, ScoreLooserGmmThresholdKeepsFlags) {
  small_corpus();
  ASSERT_EQ(run({"score", "--features", path("features.csv"), "--pipeline",
                 path("models/pipeline.json"), "--gmm", path("models/gmm.json"), "--hmm",
                 path("models/hmm.json"), "--out", path("s06")}),
            0);
  ASSERT_EQ(run({"score", "--gmm-threshold", "0.8", "--features", path("features.csv"),
                 "--pipeline", path("models/pipeline.json"), "--gmm", path("models/gmm.json"),
                 "--hmm", path("models/hmm.json"), "--out", path("s08")}),
            0);
  const auto a = wlanad::verdicts_from_json(slurp(path("s06/verdicts.json")));
  const auto b = wlanad::verdicts_from_json(slurp(path("s08/verdicts.json")));
  ASSERT_EQ(a.size(), b.size());
  ASSERT_FALSE(a.empty());
  for (std::size_t d = 0; d < a.size(); ++d) {
    ASSERT_EQ(a[d].slots.size(), b[d].slots.size());
    for (std::size_t i = 0; i < a[d].slots.size(); ++i) {
      if (a[d].slots[i].has(wlanad::kGmmOutlier)) {
        EXPECT_TRUE(b[d].slots[i].has(wlanad::kGmmOutlier));
      }
    }
  }
  const std::string csv = slurp(path("s06/slots.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "slot_start,gmm_resp,hmm_ll,mahalanobis,flags");
}

TEST_F(Cli, FingerprintMismatchFailsNamingFile) {
  small_corpus();
  // A pipeline fitted under a different PCA size cannot score these models.
  ASSERT_EQ(run({"train-gmm", "--pca-components", "2", "--features", path("features.csv"),
                 "--out", path("other")}),
            0);
  ::testing::internal::CaptureStderr();
  const int rc = run({"score", "--features", path("features.csv"), "--pipeline",
                      path("other/pipeline.json"), "--hmm", path("models/hmm.json"), "--out",
                      path("bad")});
  const std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(rc, 0);
  EXPECT_NE(err.find("hmm.json"), std::string::npos) << err;
  EXPECT_NE(err.find("fingerprint"), std::string::npos) << err;
}

TEST_F(Cli, CompareWritesTable3) {
  small_corpus();
  ASSERT_EQ(run({"compare", "--train", path("features.csv"), "--test",
                 "again=" + path("features.csv"), "--pipeline", path("models/pipeline.json"),
                 "--gmm", path("models/gmm.json"), "--hmm", path("models/hmm.json"), "--out",
                 path("cmp")}),
            0);
  const std::string md = slurp(path("cmp/table3_loglik.md"));
  EXPECT_NE(md.find("The same train data"), std::string::npos);
  EXPECT_NE(md.find("Test data from again"), std::string::npos);
}

TEST_F(Cli, IngestAndStats) {
  ASSERT_EQ(run({"simulate", "--seed", "5", "--normal-days", "1", "--abnormal-days", "1", "--out",
                 path("corpus")}),
            0);
  std::string trace;
  for (const auto& e : fs::directory_iterator(dir_ / "corpus")) {
    if (e.path().extension() == ".csv") trace = e.path().string();
  }
  ASSERT_FALSE(trace.empty());
  ASSERT_EQ(run({"ingest", "--trace", trace, "--out", path("ing")}), 0);
  EXPECT_EQ(slurp(path("ing/issues.csv")), "stage,where,reason\n");
  ASSERT_EQ(run({"stats", "--trace", trace, "--out", path("stats")}), 0);
  for (const char* f : {"sessions_per_user_hourly_cdf.csv", "per_ap_daily_duration_cdf.csv",
                        "correlation.csv", "pca_variance.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "stats" / f)) << f;
  }
}

TEST_F(Cli, ErrorsAreNonzeroWithDiagnostics) {
  EXPECT_NE(run({"score", "--features", path("missing.csv"), "--pipeline", path("p.json"),
                 "--out", path("x")}),
            0);
  {
    std::ofstream(path("bad.json")) << R"({"hmm_states": 0})";
  }
  small_corpus();
  ::testing::internal::CaptureStderr();
  EXPECT_NE(run({"train-hmm", "--config", path("bad.json"), "--features", path("features.csv"),
                 "--out", path("y")}),
            0);
  std::string err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("hmm_states"), std::string::npos) << err;

  {
    std::ofstream(path("typo.json")) << R"({"hmm_statez": 3})";
  }
  ::testing::internal::CaptureStderr();
  EXPECT_NE(run({"train-hmm", "--config", path("typo.json"), "--features", path("features.csv"),
                 "--out", path("z")}),
            0);
  err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("hmm_statez"), std::string::npos) << err;
}

TEST_F(Cli, FlagsWinOverConfigFile) {
  small_corpus();
  {
    std::ofstream(path("cfg.json")) << R"({"hmm_states": 2})";
  }
  ASSERT_EQ(run({"train-hmm", "--config", path("cfg.json"), "--features", path("features.csv"),
                 "--pipeline", path("models/pipeline.json"), "--out", path("two")}),
            0);
  EXPECT_EQ(wlanad::HmmModel::from_json(slurp(path("two/hmm.json"))).states(), 2);
  ASSERT_EQ(run({"train-hmm", "--config", path("cfg.json"), "--states", "4", "--features",
                 path("features.csv"), "--pipeline", path("models/pipeline.json"), "--out",
                 path("four")}),
            0);
  EXPECT_EQ(wlanad::HmmModel::from_json(slurp(path("four/hmm.json"))).states(), 4);
}

TEST_F(Cli, SimulateEvaluateDeterministic) {
  ASSERT_EQ(run({"simulate", "--seed", "7", "--out", path("corpus")}), 0);
  ASSERT_EQ(run({"evaluate", "--seed", "7", "--corpus", path("corpus"), "--out", path("r1")}), 0);
  ASSERT_EQ(run({"evaluate", "--seed", "7", "--corpus", path("corpus"), "--out", path("r2")}), 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "r1")) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "r2" / e.path().filename())) << e.path().filename();
  }
  for (const char* f : {"table5_gmm.md", "table6_hmm.md", "table7_patterns.md",
                        "table3_loglik.md", "day_likelihoods.csv", "verdicts.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "r1" / f)) << f;
  }
  EXPECT_GE(files, 10u);
  const std::string t6 = slurp(path("r1/table6_hmm.md"));
  EXPECT_NE(t6.find("(Threshold: -10)"), std::string::npos);
  EXPECT_NE(t6.find("F1 Score"), std::string::npos);
}

}  // namespace
