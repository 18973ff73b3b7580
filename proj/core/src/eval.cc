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
#include "wlanad/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace wlanad {
namespace {

void check_grid(const DayVerdict& verdict, const GroundTruth& truth) {
  if (verdict.slots.size() != truth.labels.size()) {
    throw std::invalid_argument(fmt::format(
        "verdict has {} slots but ground truth has {}", verdict.slots.size(),
        truth.labels.size()));
  }
  for (std::size_t i = 0; i < verdict.slots.size(); ++i) {
    if (verdict.slots[i].slot_start != truth.slot_start(i)) {
      throw std::invalid_argument(fmt::format(
          "slot {} starts at {} in the verdict but {} in the ground truth", i,
          verdict.slots[i].slot_start, truth.slot_start(i)));
    }
  }
}

void check_days(std::span<const DayVerdict> verdicts, std::span<const GroundTruth> truth) {
  if (verdicts.size() != truth.size()) {
    throw std::invalid_argument("verdict and ground-truth day counts differ");
  }
}

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt_threshold(double t) { return fmt::format("{}", t); }

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

bool flagged_by(const SlotVerdict& slot, ModelKind source) {
  return source == ModelKind::kGmm ? slot.has(kGmmOutlier) : slot.has(kHmmLowLoglik);
}

ConfusionCounts confusion(const DayVerdict& verdict, const GroundTruth& truth,
                          ModelKind source) {
  check_grid(verdict, truth);
  ConfusionCounts c;
  for (std::size_t i = 0; i < verdict.slots.size(); ++i) {
    const bool flagged = flagged_by(verdict.slots[i], source);
    const bool anomalous = truth.labels[i].has_value();
    if (flagged && anomalous) ++c.tp;
    else if (flagged) ++c.fp;
    else if (anomalous) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ConfusionCounts confusion(std::span<const DayVerdict> verdicts,
                          std::span<const GroundTruth> truth, ModelKind source) {
  check_days(verdicts, truth);
  ConfusionCounts c;
  for (std::size_t d = 0; d < verdicts.size(); ++d) c += confusion(verdicts[d], truth[d], source);
  return c;
}

MetricSet metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("no slots to compute metrics over");
  MetricSet m;
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.tnr = ratio(c.tn, c.fp + c.tn);
  m.tpr = ratio(c.tp, c.tp + c.fn);
  m.accuracy = ratio(c.tp + c.tn, c.total());
  if (c.tp == 0) {
    m.f1 = 0.0;
  } else {
    m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  }
  return m;
}

std::string format_rate(std::int64_t detected, std::int64_t total) {
  if (total <= 0) return fmt::format("n/a ({}/{})", detected, total);
  // Truncated, not rounded: 14/17 reads 82.3%.
  const std::int64_t tenths = (1000 * detected) / total;
  if (tenths % 10 == 0) return fmt::format("{}% ({}/{})", tenths / 10, detected, total);
  return fmt::format("{}.{}% ({}/{})", tenths / 10, tenths % 10, detected, total);
}

std::string format_percent(std::optional<double> fraction) {
  if (!fraction) return "n/a";
  return fmt::format("{:.1f}%", *fraction * 100.0);
}

std::vector<PatternRate> per_pattern_rates(std::span<const DayVerdict> verdicts,
                                           std::span<const GroundTruth> truth,
                                           ModelKind source) {
  check_days(verdicts, truth);
  std::vector<PatternRate> rates;
  for (ScenarioKind k : kAllScenarioKinds) rates.push_back({k, 0, 0});
  for (std::size_t d = 0; d < verdicts.size(); ++d) {
    check_grid(verdicts[d], truth[d]);
    for (std::size_t i = 0; i < truth[d].labels.size(); ++i) {
      const auto& label = truth[d].labels[i];
      if (!label) continue;
      auto& r = rates[static_cast<std::size_t>(*label)];
      ++r.total;
      if (flagged_by(verdicts[d].slots[i], source)) ++r.detected;
    }
  }
  return rates;
}

std::vector<ThresholdRow> threshold_sweep(std::span<const DayVerdict> verdicts,
                                          std::span<const GroundTruth> truth,
                                          ModelKind source,
                                          std::span<const double> thresholds,
                                          const std::string& label) {
  std::vector<ThresholdRow> rows;
  for (double t : thresholds) {
    std::vector<DayVerdict> copy(verdicts.begin(), verdicts.end());
    for (auto& d : copy) apply_threshold(d, source, t);
    ThresholdRow row;
    row.label = fmt::format("{} (Threshold: {})", label, fmt_threshold(t));
    row.threshold = t;
    row.counts = confusion(copy, truth, source);
    row.metrics = metrics(row.counts);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string threshold_table_markdown(std::span<const ThresholdRow> rows) {
  std::string out = "| | FPR | TNR | TPR | ACC | F1 Score |\n|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", r.label, format_percent(r.metrics.fpr),
                       format_percent(r.metrics.tnr), format_percent(r.metrics.tpr),
                       format_percent(r.metrics.accuracy), format_percent(r.metrics.f1));
  }
  return out;
}

std::string threshold_table_csv(std::span<const ThresholdRow> rows) {
  auto cell = [](const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string();
  };
  std::string out = "label,threshold,tp,fp,tn,fn,fpr,tnr,tpr,acc,f1\n";
  for (const auto& r : rows) {
    out += fmt::format("\"{}\",{},{},{},{},{},{},{},{},{},{}\n", r.label, r.threshold, r.counts.tp,
                       r.counts.fp, r.counts.tn, r.counts.fn, cell(r.metrics.fpr),
                       cell(r.metrics.tnr), cell(r.metrics.tpr), cell(r.metrics.accuracy),
                       cell(r.metrics.f1));
  }
  return out;
}

std::string pattern_table_markdown(std::span<const PatternTableRow> rows) {
  std::string out = "| Model |";
  std::string rule = "|---|";
  for (ScenarioKind k : kAllScenarioKinds) {
    out += fmt::format(" {} |", to_string(k));
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} |", r.model);
    for (const auto& rate : r.rates) out += fmt::format(" {} |", format_rate(rate.detected, rate.total));
    out += '\n';
  }
  return out;
}

std::string pattern_table_csv(std::span<const PatternTableRow> rows) {
  std::string out = "model,kind,detected,total,rate\n";
  for (const auto& r : rows) {
    for (const auto& rate : r.rates) {
      out += fmt::format("{},{},{},{},{}\n", r.model, to_string(rate.kind), rate.detected,
                         rate.total,
                         rate.total > 0 ? fmt::format("{}", static_cast<double>(rate.detected) /
                                                                static_cast<double>(rate.total))
                                        : std::string());
    }
  }
  return out;
}

DaySeparation best_day_threshold(std::span<const double> totals,
                                 const std::vector<bool>& abnormal) {
  if (totals.size() != abnormal.size() || totals.empty()) {
    throw std::invalid_argument("day totals and labels must be non-empty and equal in length");
  }
  std::vector<double> sorted(totals.begin(), totals.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  // Cutoffs: below everything, between neighbours, above everything.
  std::vector<double> cutoffs{sorted.front()};
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double a = sorted[i], b = sorted[i + 1];
    cutoffs.push_back(std::isfinite(a) && std::isfinite(b) ? a + (b - a) / 2.0 : b);
  }
  cutoffs.push_back(std::isfinite(sorted.back()) ? sorted.back() + 1.0
                                                 : std::numeric_limits<double>::infinity());
  DaySeparation best{cutoffs.front(), -1.0};
  for (double c : cutoffs) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < totals.size(); ++i) {
      if ((totals[i] < c) == abnormal[i]) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(totals.size());
    if (acc > best.accuracy) best = {c, acc};
  }
  return best;
}

}  // namespace wlanad
