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
#include "commands.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "config.h"
#include "pipeline.h"
#include "wlanad/detect.h"
#include "wlanad/features.h"
#include "wlanad/ingest.h"
#include "wlanad/simulate.h"
#include "wlanad/timeutil.h"

namespace wlanad::cli {
namespace {

namespace fs = std::filesystem;

// Flag values that override the config file when given.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> utc_offset_seconds;
  bool working_hours = false;
  std::optional<int> working_hours_start;
  std::optional<int> working_hours_end;
  std::optional<int> pca_components;
  std::optional<int> gmm_components;
  std::optional<int> gmm_max_iter;
  std::optional<double> gmm_tol;
  std::optional<int> hmm_states;
  std::optional<int> hmm_max_iter;
  std::optional<double> hmm_tol;
  std::optional<std::string> hmm_init;
  std::optional<double> gmm_threshold;
  std::optional<double> hmm_threshold;
  std::optional<double> gmm_day_threshold;
  std::optional<double> hmm_day_threshold;
  std::optional<int> train_normal_days;

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
    auto set = [](auto& field, const auto& value) {
      if (value) field = *value;
    };
    set(c.seed, seed);
    set(c.utc_offset_seconds, utc_offset_seconds);
    if (working_hours) c.working_hours = true;
    set(c.working_hours_start, working_hours_start);
    set(c.working_hours_end, working_hours_end);
    set(c.pca_components, pca_components);
    set(c.gmm_components, gmm_components);
    set(c.gmm_max_iter, gmm_max_iter);
    set(c.gmm_tol, gmm_tol);
    set(c.hmm_states, hmm_states);
    set(c.hmm_max_iter, hmm_max_iter);
    set(c.hmm_tol, hmm_tol);
    set(c.hmm_init, hmm_init);
    set(c.gmm_threshold, gmm_threshold);
    set(c.hmm_threshold, hmm_threshold);
    if (gmm_day_threshold) c.gmm_day_threshold = gmm_day_threshold;
    if (hmm_day_threshold) c.hmm_day_threshold = hmm_day_threshold;
    set(c.train_normal_days, train_normal_days);
    c.validate();
    return c;
  }
};

enum Group : unsigned {
  kTime = 1,
  kPca = 2,
  kGmm = 4,
  kHmm = 8,
  kThresholds = 16,
  kSeed = 32,
  kTrain = 64,
};

// Registers the config flags of the listed groups. Inside train-gmm and
// train-hmm the short names (--components, --states, --max-iter, --tol)
// address that command's model.
void add_config_flags(CLI::App* app, Overrides& o, unsigned groups, const char* model = "") {
  app->add_option("--config", o.config_path, "JSON pipeline config; flags win over its values")
      ->check(CLI::ExistingFile);
  if (groups & kSeed) app->add_option("--seed", o.seed, "seed for every random draw");
  if (groups & kTime) {
    app->add_option("--utc-offset-seconds", o.utc_offset_seconds, "local time minus UTC");
    app->add_flag("--working-hours", o.working_hours, "keep weekday working-hour slots only");
    app->add_option("--working-hours-start", o.working_hours_start, "first local hour kept");
    app->add_option("--working-hours-end", o.working_hours_end, "first local hour dropped");
  }
  if (groups & kPca) app->add_option("--pca-components", o.pca_components, "principal components kept");
  const std::string m = model;
  if (groups & kGmm) {
    app->add_option(m == "gmm" ? "--components,--gmm-components" : "--gmm-components",
                    o.gmm_components, "mixture components");
    app->add_option(m == "gmm" ? "--max-iter,--gmm-max-iter" : "--gmm-max-iter", o.gmm_max_iter,
                    "EM iteration cap");
    app->add_option(m == "gmm" ? "--tol,--gmm-tol" : "--gmm-tol", o.gmm_tol,
                    "EM log-likelihood tolerance");
  }
  if (groups & kHmm) {
    app->add_option(m == "hmm" ? "--states,--hmm-states" : "--hmm-states", o.hmm_states,
                    "hidden states");
    app->add_option(m == "hmm" ? "--max-iter,--hmm-max-iter" : "--hmm-max-iter", o.hmm_max_iter,
                    "Baum-Welch iteration cap");
    app->add_option(m == "hmm" ? "--tol,--hmm-tol" : "--hmm-tol", o.hmm_tol,
                    "Baum-Welch log-likelihood tolerance");
    app->add_option(m == "hmm" ? "--init,--hmm-init" : "--hmm-init", o.hmm_init,
                    "random or uniform initial pi and A")
        ->check(CLI::IsMember({"random", "uniform"}));
  }
  if (groups & kThresholds) {
    app->add_option("--gmm-threshold", o.gmm_threshold, "flag slots with max responsibility below");
    app->add_option("--hmm-threshold", o.hmm_threshold, "flag slots with step log-likelihood below");
    app->add_option("--gmm-day-threshold", o.gmm_day_threshold, "abnormal day below this total");
    app->add_option("--hmm-day-threshold", o.hmm_day_threshold, "abnormal day below this total");
  }
  if (groups & kTrain) {
    app->add_option("--train-normal-days", o.train_normal_days, "normal days used for training");
  }
}

std::vector<SlotFeatures> load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read features '{}'", path));
  try {
    return read_features_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
}

template <typename Model>
Model load_model(const std::string& path) {
  try {
    return Model::from_json(read_text(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
}

FeaturePipeline load_pipeline(const std::string& path) {
  try {
    return FeaturePipeline::from_json(read_text(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
}

std::string in_dir(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string trace_csv(const std::vector<double>& trace) {
  std::string out = "iteration,loglik\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out += fmt::format("{},{}\n", i, trace[i]);
  return out;
}

SessionizeResult sessionize_file(const std::string& path) {
  ParseResult parsed = parse_trace_file(path);
  for (const auto& issue : parsed.issues) {
    std::cerr << fmt::format("{}:{}: {}\n", path, issue.line, issue.reason);
  }
  return sessionize(parsed.records);
}

// Features of every AP in every trace.
std::vector<SlotFeatures> featurize_traces(const std::vector<std::string>& traces,
                                           const std::optional<std::string>& ap,
                                           const std::optional<std::string>& start,
                                           const std::optional<std::string>& end,
                                           const PipelineConfig& config) {
  std::vector<SlotFeatures> out;
  for (const auto& path : traces) {
    const SessionizeResult s = sessionize_file(path);
    std::set<std::string> aps;
    for (const auto& session : s.sessions) aps.insert(session.ap);
    if (ap) aps = {*ap};
    for (const auto& a : aps) {
      auto [ws, we] = session_window(s.sessions, a);
      if (start) ws = parse_iso8601(*start);
      if (end) we = parse_iso8601(*end);
      const auto slots = featurize(s.sessions, a, ws, we, config);
      out.insert(out.end(), slots.begin(), slots.end());
    }
  }
  return out;
}

int cmd_ingest(const std::string& trace, const std::string& out_dir) {
  ParseResult parsed = parse_trace_file(trace);
  const SessionizeResult s = sessionize(parsed.records);
  fs::create_directories(out_dir);
  std::ostringstream sessions;
  write_sessions(sessions, s.sessions);
  write_text(in_dir(out_dir, "sessions.csv"), sessions.str());
  std::string issues = "stage,where,reason\n";
  for (const auto& i : parsed.issues) issues += fmt::format("parse,line {},{}\n", i.line, i.reason);
  for (const auto& i : s.issues) issues += fmt::format("sessionize,{},{}\n", i.session_id, i.reason);
  write_text(in_dir(out_dir, "issues.csv"), issues);
  std::cout << fmt::format("{} records, {} sessions, {} parse issues, {} session issues\n",
                           parsed.records.size(), s.sessions.size(), parsed.issues.size(),
                           s.issues.size());
  return 0;
}

int cmd_stats(const std::vector<std::string>& traces, const std::string& out_dir,
              const PipelineConfig& config) {
  std::vector<Session> sessions;
  for (const auto& path : traces) {
    auto s = sessionize_file(path);
    sessions.insert(sessions.end(), s.sessions.begin(), s.sessions.end());
  }
  fs::create_directories(out_dir);
  UsageOptions opts;
  opts.utc_offset_seconds = config.utc_offset_seconds;
  const UsageStatistics stats = usage_statistics(sessions, opts);
  auto emit = [&](const char* name, const XYTable& t, const char* x, const char* y) {
    std::ostringstream ss;
    write_xy_csv(ss, t, x, y);
    write_text(in_dir(out_dir, name), ss.str());
  };
  emit("sessions_per_user_hourly_ma.csv", stats.sessions_per_user_hourly_ma, "index", "sessions");
  emit("sessions_per_user_hourly_cdf.csv", stats.sessions_per_user_hourly_cdf, "sessions", "cdf");
  emit("sessions_per_user_daily_ma.csv", stats.sessions_per_user_daily_ma, "index", "sessions");
  emit("sessions_per_user_daily_cdf.csv", stats.sessions_per_user_daily_cdf, "sessions", "cdf");
  emit("per_ap_user_cdf.csv", stats.per_ap_user_cdf, "users", "cdf");
  emit("per_ap_session_cdf.csv", stats.per_ap_session_cdf, "sessions", "cdf");
  emit("per_ap_daily_duration_cdf.csv", stats.per_ap_daily_duration_cdf, "minutes", "cdf");

  const auto slots = featurize_traces(traces, std::nullopt, std::nullopt, std::nullopt, config);
  if (slots.size() >= 2) {
    const Matrix raw = to_matrix(slots);
    const CorrelationMatrix corr = correlation_matrix(raw);
    std::string c = "feature";
    for (auto n : kRawFeatureNames) c += fmt::format(",{}", n);
    c += '\n';
    for (std::size_t i = 0; i < corr.size(); ++i) {
      c += kRawFeatureNames[i];
      for (const auto& v : corr[i]) c += v ? fmt::format(",{}", *v) : std::string(",");
      c += '\n';
    }
    write_text(in_dir(out_dir, "correlation.csv"), c);
    const Standardizer st = Standardizer::fit(raw);
    const Matrix z = st.apply(raw);
    const PcaProjection pca = PcaProjection::fit(z, static_cast<int>(z.cols()));
    std::string v = "component,eigenvalue,explained,cumulative\n";
    for (int i = 0; i < pca.eigenvalues().size(); ++i) {
      v += fmt::format("{},{},{},{}\n", i + 1, pca.eigenvalues()(i), pca.explained_variance()(i),
                       pca.cumulative_explained(i + 1));
    }
    write_text(in_dir(out_dir, "pca_variance.csv"), v);
  }
  std::cout << fmt::format("{} sessions summarized into {}\n", sessions.size(), out_dir);
  return 0;
}

template <typename Fit>
int cmd_train(const std::string& features, const std::optional<std::string>& pipeline_path,
              const std::string& out_dir, const PipelineConfig& config, Fit fit,
              const char* model_file, const char* trace_file) {
  const auto days = split_days(load_features(features), config.utc_offset_seconds);
  if (days.empty()) throw std::runtime_error(fmt::format("{}: no feature rows", features));
  fs::create_directories(out_dir);
  FeaturePipeline pipeline =
      pipeline_path ? load_pipeline(*pipeline_path) : fit_pipeline(days, config);
  if (!pipeline_path) write_text(in_dir(out_dir, "pipeline.json"), pipeline.to_json() + "\n");
  const auto result = fit(pipeline, days, config);
  write_text(in_dir(out_dir, model_file), result.model.to_json() + "\n");
  write_text(in_dir(out_dir, trace_file), trace_csv(result.trace));
  std::cout << fmt::format("trained on {} days: {} iterations, converged {}, final loglik {}\n",
                           days.size(), result.iterations, result.converged,
                           result.trace.empty() ? 0.0 : result.trace.back());
  return 0;
}

int cmd_score(const std::string& features, const std::string& pipeline_path,
              const std::optional<std::string>& gmm_path, const std::optional<std::string>& hmm_path,
              bool diagnostics, const std::string& out_dir, const PipelineConfig& config) {
  if (!gmm_path && !hmm_path) throw std::invalid_argument("score needs --gmm and/or --hmm");
  const FeaturePipeline pipeline = load_pipeline(pipeline_path);
  std::optional<GmmModel> gmm;
  std::optional<HmmModel> hmm;
  if (gmm_path) gmm = load_model<GmmModel>(*gmm_path);
  if (hmm_path) hmm = load_model<HmmModel>(*hmm_path);
  std::vector<DayVerdict> verdicts;
  for (const auto& day : split_days(load_features(features), config.utc_offset_seconds)) {
    const FeatureSeries series = project(pipeline, day);
    std::optional<DayVerdict> g, h;
    try {
      if (gmm) g = score_day_gmm(*gmm, series, config.gmm_threshold, config.gmm_day_threshold);
    } catch (const FingerprintMismatch& e) {
      throw std::runtime_error(fmt::format("{}: {}", *gmm_path, e.what()));
    }
    try {
      if (hmm) {
        h = score_day_hmm(*hmm, series, config.hmm_threshold, diagnostics,
                          config.hmm_day_threshold);
      }
    } catch (const FingerprintMismatch& e) {
      throw std::runtime_error(fmt::format("{}: {}", *hmm_path, e.what()));
    }
    verdicts.push_back(g && h ? merge_verdicts(*g, *h) : (g ? *g : *h));
  }
  fs::create_directories(out_dir);
  write_text(in_dir(out_dir, "verdicts.json"), verdicts_to_json(verdicts) + "\n");
  std::ostringstream slots;
  write_slot_csv(slots, verdicts);
  write_text(in_dir(out_dir, "slots.csv"), slots.str());
  std::size_t flagged = 0;
  for (const auto& d : verdicts) {
    for (const auto& s : d.slots) flagged += s.flags != 0;
  }
  std::cout << fmt::format("scored {} days, {} flagged slots\n", verdicts.size(), flagged);
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Access-point usage anomaly detection from RADIUS accounting logs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "wlanad 0.1.0");

  Overrides o;
  std::vector<std::string> traces;
  std::string trace, out, features, pipeline_path, corpus_dir;
  std::optional<std::string> ap, window_start, window_end, pipeline_opt, gmm_path, hmm_path;
  bool no_diagnostics = false;
  CorpusOptions corpus_opts;
  std::optional<std::string> first_day;
  std::string train_features;
  std::vector<std::string> tests;

  auto* ingest = app.add_subcommand("ingest", "parse a trace and rebuild sessions");
  ingest->add_option("--trace", trace, "accounting CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", out, "output directory")->required();

  auto* featurize_cmd = app.add_subcommand("featurize", "aggregate traces into 15-minute slots");
  featurize_cmd->add_option("--trace", traces, "accounting CSVs")->required()->check(CLI::ExistingFile);
  featurize_cmd->add_option("--ap", ap, "only this AP");
  featurize_cmd->add_option("--window-start", window_start, "ISO-8601, slot aligned");
  featurize_cmd->add_option("--window-end", window_end, "ISO-8601, slot aligned");
  featurize_cmd->add_option("--pipeline", pipeline_opt, "also write projections with this pipeline")
      ->check(CLI::ExistingFile);
  featurize_cmd->add_option("--out", out, "features CSV")->required();
  add_config_flags(featurize_cmd, o, kTime);

  auto* stats = app.add_subcommand("stats", "usage statistics, correlations and PCA variance");
  stats->add_option("--trace", traces, "accounting CSVs")->required()->check(CLI::ExistingFile);
  stats->add_option("--out", out, "output directory")->required();
  add_config_flags(stats, o, kTime);

  auto* train_gmm_cmd = app.add_subcommand("train-gmm", "fit the time-invariant mixture model");
  train_gmm_cmd->add_option("--features", features, "features CSV")->required()->check(CLI::ExistingFile);
  train_gmm_cmd->add_option("--pipeline", pipeline_opt, "reuse this feature pipeline")
      ->check(CLI::ExistingFile);
  train_gmm_cmd->add_option("--out", out, "output directory")->required();
  add_config_flags(train_gmm_cmd, o, kTime | kPca | kGmm | kSeed, "gmm");

  auto* train_hmm_cmd = app.add_subcommand("train-hmm", "fit the time-variant hidden Markov model");
  train_hmm_cmd->add_option("--features", features, "features CSV")->required()->check(CLI::ExistingFile);
  train_hmm_cmd->add_option("--pipeline", pipeline_opt, "reuse this feature pipeline")
      ->check(CLI::ExistingFile);
  train_hmm_cmd->add_option("--out", out, "output directory")->required();
  add_config_flags(train_hmm_cmd, o, kTime | kPca | kHmm | kSeed, "hmm");

  auto* score = app.add_subcommand("score", "flag anomalous slots and days");
  score->add_option("--features", features, "features CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--pipeline", pipeline_path, "feature pipeline JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--gmm", gmm_path, "GMM JSON")->check(CLI::ExistingFile);
  score->add_option("--hmm", hmm_path, "HMM JSON")->check(CLI::ExistingFile);
  score->add_flag("--no-diagnostics", no_diagnostics, "skip Viterbi, Mahalanobis and transitions");
  score->add_option("--out", out, "output directory")->required();
  add_config_flags(score, o, kTime | kThresholds);

  auto* simulate = app.add_subcommand("simulate", "generate a labeled testbed corpus");
  simulate->add_option("--out", out, "output directory")->required();
  simulate->add_option("--normal-days", corpus_opts.normal_days, "days without anomalies");
  simulate->add_option("--abnormal-days", corpus_opts.abnormal_days, "days with anomalies");
  simulate->add_option("--min-anomalies", corpus_opts.min_anomalies_per_day, "per abnormal day");
  simulate->add_option("--max-anomalies", corpus_opts.max_anomalies_per_day, "per abnormal day");
  simulate->add_option("--first-day", first_day, "ISO-8601 date of the first day");
  add_config_flags(simulate, o, kSeed);

  auto* evaluate = app.add_subcommand("evaluate", "train, score and report on a corpus");
  evaluate->add_option("--corpus", corpus_dir, "directory written by simulate")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--out", out, "report directory")->required();
  add_config_flags(evaluate, o, kPca | kGmm | kHmm | kThresholds | kSeed | kTrain);

  auto* compare = app.add_subcommand("compare", "log-likelihood of train and test data per model");
  compare->add_option("--train", train_features, "training features CSV")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--test", tests, "NAME=features.csv, repeatable")->required();
  compare->add_option("--pipeline", pipeline_path, "feature pipeline JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--gmm", gmm_path, "GMM JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--hmm", hmm_path, "HMM JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", out, "output directory")->required();
  add_config_flags(compare, o, kTime);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest) return cmd_ingest(trace, out);
    const PipelineConfig config = o.resolve();
    if (*featurize_cmd) {
      const auto slots = featurize_traces(traces, ap, window_start, window_end, config);
      if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
      std::ostringstream ss;
      write_features_csv(ss, slots);
      write_text(out, ss.str());
      if (pipeline_opt) {
        const FeaturePipeline pipeline = load_pipeline(*pipeline_opt);
        std::ostringstream proj;
        for (const auto& day : split_days(slots, config.utc_offset_seconds)) {
          std::ostringstream one;
          write_projection_csv(one, project(pipeline, day));
          std::string text = one.str();
          // One header for the whole file.
          if (proj.tellp() > 0) text = text.substr(text.find('\n') + 1);
          proj << text;
        }
        write_text(fs::path(out).replace_extension(".projection.csv").string(), proj.str());
      }
      std::cout << fmt::format("{} slots written to {}\n", slots.size(), out);
      return 0;
    }
    if (*stats) return cmd_stats(traces, out, config);
    if (*train_gmm_cmd) {
      return cmd_train(features, pipeline_opt, out, config, train_gmm, "gmm.json", "gmm_trace.csv");
    }
    if (*train_hmm_cmd) {
      return cmd_train(features, pipeline_opt, out, config, train_hmm, "hmm.json", "hmm_trace.csv");
    }
    if (*score) {
      return cmd_score(features, pipeline_path, gmm_path, hmm_path, !no_diagnostics, out, config);
    }
    if (*simulate) {
      if (first_day) corpus_opts.first_day = parse_iso8601(*first_day);
      const Corpus corpus = generate_corpus(PopulationProfile::testbed(), corpus_opts, config.seed);
      write_corpus(corpus, config.seed, out);
      std::cout << fmt::format("{} days ({} anomalous slots) written to {}\n", corpus.days.size(),
                               corpus.total_anomalous_slots(), out);
      return 0;
    }
    if (*evaluate) {
      std::string corpus_ap;
      const auto days = load_corpus_dir(corpus_dir, &corpus_ap);
      const TestbedReport report = run_testbed(days, corpus_ap, config);
      write_testbed_report(report, out);
      std::cout << summary_markdown(report);
      return 0;
    }
    if (*compare) {
      const FeaturePipeline pipeline = load_pipeline(pipeline_path);
      const GmmModel gmm = load_model<GmmModel>(*gmm_path);
      const HmmModel hmm = load_model<HmmModel>(*hmm_path);
      auto series_of = [&](const std::string& path) {
        std::vector<FeatureSeries> out_series;
        for (const auto& day : split_days(load_features(path), config.utc_offset_seconds)) {
          out_series.push_back(project(pipeline, day));
        }
        return out_series;
      };
      const auto train = series_of(train_features);
      std::vector<NamedDataset> sets;
      for (const auto& t : tests) {
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw std::invalid_argument(fmt::format("--test '{}' must look like NAME=FILE", t));
        }
        sets.push_back({t.substr(0, eq), series_of(t.substr(eq + 1))});
      }
      const ComparisonTable table = compare_models(gmm, hmm, train, sets);
      fs::create_directories(out);
      write_text(in_dir(out, "table3_loglik.md"), table.to_markdown());
      write_text(in_dir(out, "table3_loglik.csv"), table.to_csv());
      std::cout << table.to_markdown();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "wlanad: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace wlanad::cli
