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
#include "pipeline.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "wlanad/timeutil.h"

namespace wlanad::cli {
namespace {

Matrix stack(std::span<const Matrix> parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

std::vector<Matrix> project_days(const FeaturePipeline& pipeline,
                                 std::span<const std::vector<SlotFeatures>> days) {
  std::vector<Matrix> out;
  for (const auto& d : days) out.push_back(project(pipeline, d).values);
  return out;
}

ThresholdRow best_f1(const std::vector<ThresholdRow>& rows) {
  const ThresholdRow* best = &rows.front();
  for (const auto& r : rows) {
    if (r.metrics.f1.value_or(0.0) > best->metrics.f1.value_or(0.0)) best = &r;
  }
  return *best;
}

std::vector<ThresholdRow> interleave(const std::vector<ThresholdRow>& normal,
                                     const std::vector<ThresholdRow>& anomalous) {
  std::vector<ThresholdRow> out;
  for (std::size_t i = 0; i < normal.size(); ++i) {
    out.push_back(normal[i]);
    out.push_back(anomalous[i]);
  }
  return out;
}

std::string csv_opt(std::optional<double> v) {
  return v ? fmt::format("{}", *v) : std::string();
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<SlotFeatures> featurize(std::span<const Session> sessions, const std::string& ap,
                                    std::int64_t window_start, std::int64_t window_end,
                                    const PipelineConfig& config) {
  return aggregate(sessions, ap, window_start, window_end, config.aggregate_options());
}

std::pair<std::int64_t, std::int64_t> session_window(std::span<const Session> sessions,
                                                     const std::string& ap) {
  std::int64_t lo = 0, hi = 0;
  bool any = false;
  for (const auto& s : sessions) {
    if (s.ap != ap) continue;
    lo = any ? std::min(lo, s.start_time) : s.start_time;
    hi = any ? std::max(hi, s.end_time) : s.end_time;
    any = true;
  }
  if (!any) throw std::runtime_error(fmt::format("no sessions at AP '{}'", ap));
  return {floor_to(lo, kSlotSeconds), floor_to(hi, kSlotSeconds) + kSlotSeconds};
}

std::vector<std::vector<SlotFeatures>> split_days(std::span<const SlotFeatures> slots,
                                                  std::int64_t utc_offset_seconds) {
  std::map<std::pair<std::string, std::int64_t>, std::vector<SlotFeatures>> groups;
  for (const auto& s : slots) {
    groups[{s.ap, floor_to(s.slot_start + utc_offset_seconds, kDaySeconds)}].push_back(s);
  }
  std::vector<std::vector<SlotFeatures>> out;
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const SlotFeatures& a, const SlotFeatures& b) { return a.slot_start < b.slot_start; });
    out.push_back(fill_gaps(group, key.first, group.front().slot_start,
                            group.back().slot_start + kSlotSeconds));
  }
  return out;
}

FeaturePipeline fit_pipeline(std::span<const std::vector<SlotFeatures>> days,
                             const PipelineConfig& config) {
  std::vector<Matrix> raw;
  for (const auto& d : days) raw.push_back(to_matrix(d));
  return FeaturePipeline::fit(stack(raw), config.pca_components);
}

GmmFit train_gmm(const FeaturePipeline& pipeline,
                 std::span<const std::vector<SlotFeatures>> days, const PipelineConfig& config) {
  const auto projected = project_days(pipeline, days);
  EmOptions opts;
  opts.max_iter = config.gmm_max_iter;
  opts.tol = config.gmm_tol;
  GmmFit fit = fit_em(stack(projected), config.gmm_components, derive_seeds(config.seed).gmm, opts);
  fit.model.pipeline_fingerprint = pipeline.fingerprint();
  return fit;
}

HmmFit train_hmm(const FeaturePipeline& pipeline,
                 std::span<const std::vector<SlotFeatures>> days, const PipelineConfig& config) {
  const auto projected = project_days(pipeline, days);
  BaumWelchOptions opts;
  opts.states = config.hmm_states;
  opts.max_iter = config.hmm_max_iter;
  opts.tol = config.hmm_tol;
  opts.init = config.init();
  HmmFit fit = baum_welch(projected, derive_seeds(config.seed).hmm, opts);
  fit.model.pipeline_fingerprint = pipeline.fingerprint();
  return fit;
}

TrainedModels train_models(std::span<const std::vector<SlotFeatures>> days,
                           const PipelineConfig& config) {
  TrainedModels m;
  m.pipeline = fit_pipeline(days, config);
  m.gmm = train_gmm(m.pipeline, days, config);
  m.hmm = train_hmm(m.pipeline, days, config);
  return m;
}

DayVerdict score_day(const TrainedModels& models, const FeatureSeries& series,
                     const PipelineConfig& config) {
  const DayVerdict g =
      score_day_gmm(models.gmm.model, series, config.gmm_threshold, config.gmm_day_threshold);
  const DayVerdict h = score_day_hmm(models.hmm.model, series, config.hmm_threshold, true,
                                     config.hmm_day_threshold);
  return merge_verdicts(g, h);
}

std::vector<LabeledDay> labeled_days(const Corpus& corpus) {
  std::vector<LabeledDay> out;
  for (std::size_t i = 0; i < corpus.days.size(); ++i) {
    const auto& d = corpus.days[i];
    out.push_back({trace_file_name(d, static_cast<int>(i)), d.window_start, d.window_end,
                   d.abnormal(), d.records, d.truth});
  }
  return out;
}

std::vector<LabeledDay> load_corpus_dir(const std::string& directory, std::string* ap) {
  namespace fs = std::filesystem;
  const std::string manifest_path = (fs::path(directory) / "manifest.json").string();
  Manifest manifest;
  try {
    manifest = manifest_from_json(read_text(manifest_path));
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", manifest_path, e.what()));
  }
  if (ap) *ap = manifest.ap;
  std::vector<LabeledDay> out;
  for (const auto& d : manifest.days) {
    const std::string path = (fs::path(directory) / d.file).string();
    ParseResult parsed = parse_trace_file(path);
    if (!parsed.issues.empty()) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path, parsed.issues.front().line,
                                           parsed.issues.front().reason));
    }
    out.push_back({d.file, d.window_start, d.window_end, d.abnormal, std::move(parsed.records),
                   d.truth});
  }
  return out;
}

TestbedReport run_testbed(std::span<const LabeledDay> days, const std::string& ap,
                          const PipelineConfig& config) {
  config.validate();
  TestbedReport report;
  report.config = config;
  // The day windows already select the hours to model.
  PipelineConfig window_config = config;
  window_config.working_hours = false;

  std::vector<std::vector<SlotFeatures>> features;
  for (const auto& d : days) {
    const SessionizeResult s = sessionize(d.records);
    report.sessionize_issues += s.issues.size();
    features.push_back(featurize(s.sessions, ap, d.window_start, d.window_end, window_config));
  }

  // Training days are a seeded random pick among the normal days.
  std::vector<std::size_t> normal;
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (!days[i].abnormal) normal.push_back(i);
  }
  if (static_cast<int>(normal.size()) < config.train_normal_days) {
    throw std::invalid_argument(fmt::format("corpus has {} normal days, {} needed for training",
                                            normal.size(), config.train_normal_days));
  }
  std::mt19937_64 split_rng(derive_seeds(config.seed).split);
  std::shuffle(normal.begin(), normal.end(), split_rng);
  std::vector<bool> is_train(days.size(), false);
  for (int i = 0; i < config.train_normal_days; ++i) is_train[normal[static_cast<std::size_t>(i)]] = true;

  std::vector<std::vector<SlotFeatures>> train;
  std::vector<std::size_t> test_index;
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (is_train[i]) {
      train.push_back(features[i]);
      report.train_names.push_back(days[i].name);
    } else {
      test_index.push_back(i);
    }
  }
  if (test_index.empty()) throw std::invalid_argument("corpus leaves no test days");
  report.models = train_models(train, config);

  std::vector<FeatureSeries> train_series, normal_series, abnormal_series;
  for (const auto& d : train) train_series.push_back(project(report.models.pipeline, d));
  std::vector<DayVerdict> normal_v, abnormal_v;
  std::vector<GroundTruth> normal_t, abnormal_t;
  for (std::size_t i : test_index) {
    const FeatureSeries series = project(report.models.pipeline, features[i]);
    DayVerdict v = score_day(report.models, series, config);
    report.test_names.push_back(days[i].name);
    report.test_abnormal.push_back(days[i].abnormal);
    report.verdicts.push_back(v);
    report.truth.push_back(days[i].truth);
    report.gmm_day_totals.push_back(*v.gmm_total);
    report.hmm_day_totals.push_back(*v.hmm_total);
    (days[i].abnormal ? abnormal_series : normal_series).push_back(series);
    (days[i].abnormal ? abnormal_v : normal_v).push_back(std::move(v));
    (days[i].abnormal ? abnormal_t : normal_t).push_back(days[i].truth);
  }

  auto table = [&](ModelKind kind, const std::vector<double>& thresholds) {
    std::vector<ThresholdRow> n, a;
    if (!normal_v.empty()) n = threshold_sweep(normal_v, normal_t, kind, thresholds, "Normal Testset");
    if (!abnormal_v.empty()) {
      a = threshold_sweep(abnormal_v, abnormal_t, kind, thresholds, "Anomalous Testset");
    }
    if (n.empty()) return a;
    if (a.empty()) return n;
    return interleave(n, a);
  };
  report.gmm_table = table(ModelKind::kGmm, config.gmm_sweep);
  report.hmm_table = table(ModelKind::kHmm, config.hmm_sweep);
  report.gmm_sweep =
      threshold_sweep(report.verdicts, report.truth, ModelKind::kGmm, config.gmm_sweep, "All test days");
  report.hmm_sweep =
      threshold_sweep(report.verdicts, report.truth, ModelKind::kHmm, config.hmm_sweep, "All test days");
  report.gmm_best = best_f1(report.gmm_sweep);
  report.hmm_best = best_f1(report.hmm_sweep);

  auto default_metrics = [](const std::vector<DayVerdict>& v, const std::vector<GroundTruth>& t,
                            ModelKind kind) {
    return v.empty() ? MetricSet{} : metrics(confusion(v, t, kind));
  };
  report.hmm_default_normal = default_metrics(normal_v, normal_t, ModelKind::kHmm);
  report.hmm_default_anomalous = default_metrics(abnormal_v, abnormal_t, ModelKind::kHmm);
  report.gmm_default_normal = default_metrics(normal_v, normal_t, ModelKind::kGmm);
  report.gmm_default_anomalous = default_metrics(abnormal_v, abnormal_t, ModelKind::kGmm);

  // Table 7 uses the loosest threshold of each sweep, where detection peaks.
  report.gmm_pattern_threshold = *std::max_element(config.gmm_sweep.begin(), config.gmm_sweep.end());
  report.hmm_pattern_threshold = *std::max_element(config.hmm_sweep.begin(), config.hmm_sweep.end());
  std::vector<DayVerdict> loose = report.verdicts;
  for (auto& d : loose) {
    apply_threshold(d, ModelKind::kGmm, report.gmm_pattern_threshold);
    apply_threshold(d, ModelKind::kHmm, report.hmm_pattern_threshold);
  }
  report.patterns.push_back({fmt::format("GMM (Threshold: {})", report.gmm_pattern_threshold),
                             per_pattern_rates(loose, report.truth, ModelKind::kGmm)});
  report.patterns.push_back({fmt::format("HMM (Threshold: {})", report.hmm_pattern_threshold),
                             per_pattern_rates(loose, report.truth, ModelKind::kHmm)});

  report.gmm_days = best_day_threshold(report.gmm_day_totals, report.test_abnormal);
  report.hmm_days = best_day_threshold(report.hmm_day_totals, report.test_abnormal);

  std::vector<NamedDataset> tests;
  if (!normal_series.empty()) tests.push_back({"normal days", normal_series});
  if (!abnormal_series.empty()) tests.push_back({"abnormal days", abnormal_series});
  report.comparison =
      compare_models(report.models.gmm.model, report.models.hmm.model, train_series, tests);
  return report;
}

std::string summary_markdown(const TestbedReport& r) {
  std::string out = "# Testbed evaluation\n\n";
  out += fmt::format("Training days: {}. Test days: {} ({} abnormal). Sessionize issues: {}.\n\n",
                     r.train_names.size(), r.test_names.size(),
                     std::count(r.test_abnormal.begin(), r.test_abnormal.end(), true),
                     r.sessionize_issues);
  out += fmt::format("GMM: {} components, EM iterations {}, converged {}.\n",
                     r.models.gmm.model.components(), r.models.gmm.iterations,
                     r.models.gmm.converged);
  out += fmt::format("HMM: {} states, Baum-Welch iterations {}, converged {}.\n",
                     r.models.hmm.model.states(), r.models.hmm.iterations, r.models.hmm.converged);
  out += fmt::format("PCA: {} components explain {:.1f}% of the variance.\n\n",
                     r.models.pipeline.pca().k(),
                     100.0 * r.models.pipeline.pca().cumulative_explained(r.models.pipeline.pca().k()));
  out += "## Log-likelihoods of training and test data\n\n" + r.comparison.to_markdown() + "\n";
  out += "## GMM thresholds\n\n" + threshold_table_markdown(r.gmm_table) + "\n";
  out += "## HMM thresholds\n\n" + threshold_table_markdown(r.hmm_table) + "\n";
  out += "## Best F1 over all test slots\n\n";
  std::vector<ThresholdRow> best{r.gmm_best, r.hmm_best};
  best[0].label = fmt::format("GMM (Threshold: {})", r.gmm_best.threshold);
  best[1].label = fmt::format("HMM (Threshold: {})", r.hmm_best.threshold);
  out += threshold_table_markdown(best) + "\n";
  out += "## Detection rate per anomalous pattern\n\n" + pattern_table_markdown(r.patterns) + "\n";
  out += "## Day-level separation\n\n";
  out += fmt::format("GMM: threshold {:.2f}, accuracy {:.1f}%\n", r.gmm_days.threshold,
                     100.0 * r.gmm_days.accuracy);
  out += fmt::format("HMM: threshold {:.2f}, accuracy {:.1f}%\n", r.hmm_days.threshold,
                     100.0 * r.hmm_days.accuracy);
  return out;
}

void write_testbed_report(const TestbedReport& r, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto path = [&](const char* name) { return (fs::path(directory) / name).string(); };
  write_text(path("config.json"), r.config.to_json() + "\n");
  write_text(path("pipeline.json"), r.models.pipeline.to_json() + "\n");
  write_text(path("gmm.json"), r.models.gmm.model.to_json() + "\n");
  write_text(path("hmm.json"), r.models.hmm.model.to_json() + "\n");
  write_text(path("table3_loglik.md"), r.comparison.to_markdown());
  write_text(path("table3_loglik.csv"), r.comparison.to_csv());
  write_text(path("table5_gmm.md"), threshold_table_markdown(r.gmm_table));
  write_text(path("table5_gmm.csv"), threshold_table_csv(r.gmm_table));
  write_text(path("table6_hmm.md"), threshold_table_markdown(r.hmm_table));
  write_text(path("table6_hmm.csv"), threshold_table_csv(r.hmm_table));
  write_text(path("table7_patterns.md"), pattern_table_markdown(r.patterns));
  write_text(path("table7_patterns.csv"), pattern_table_csv(r.patterns));
  std::string days = "day,window_start,abnormal,gmm_total,hmm_total\n";
  for (std::size_t i = 0; i < r.test_names.size(); ++i) {
    days += fmt::format("{},{},{},{},{}\n", r.test_names[i],
                        format_iso8601(r.verdicts[i].window_start), r.test_abnormal[i] ? 1 : 0,
                        csv_opt(r.verdicts[i].gmm_total), csv_opt(r.verdicts[i].hmm_total));
  }
  write_text(path("day_likelihoods.csv"), days);
  write_text(path("verdicts.json"), verdicts_to_json(r.verdicts) + "\n");
  std::ostringstream slots;
  write_slot_csv(slots, r.verdicts);
  write_text(path("slots.csv"), slots.str());
  write_text(path("summary.md"), summary_markdown(r));
}

}  // namespace wlanad::cli
