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
#include "wlanad/detect.h"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "json_util.h"
#include "wlanad/timeutil.h"

namespace wlanad {
namespace {

using internal::Json;

constexpr int kVerdictVersion = 1;

struct FlagName {
  SlotFlag flag;
  std::string_view name;
};
constexpr FlagName kFlagNames[] = {
    {kGmmOutlier, "gmm_outlier"},
    {kHmmLowLoglik, "hmm_low_loglik"},
    {kRareTransition, "rare_transition"},
};

unsigned flag_from_string(std::string_view name) {
  for (const auto& f : kFlagNames) {
    if (f.name == name) return f.flag;
  }
  throw std::runtime_error(fmt::format("unknown slot flag '{}'", name));
}

void require_series(const FeatureSeries& series, int dim) {
  if (series.length() == 0) throw std::invalid_argument("empty feature series");
  if (series.values.rows() != series.length()) {
    throw std::invalid_argument("feature series rows and slot starts disagree");
  }
  if (series.values.cols() != dim) {
    throw std::invalid_argument(fmt::format(
        "feature series has {} columns, model expects {}", series.values.cols(), dim));
  }
}

// JSON cannot hold infinities; they travel as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::runtime_error(fmt::format("bad number '{}'", s));
}

Json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : Json(nullptr);
}

std::optional<double> optional_from(const Json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return number_from(*it);
}

std::string csv_number(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kGmm ? "GMM" : "HMM";
}

void check_fingerprint(const std::string& model_fingerprint,
                       const FeatureSeries& series) {
  if (model_fingerprint != series.fingerprint) {
    throw FingerprintMismatch(model_fingerprint, series.fingerprint);
  }
}

DayVerdict score_day_gmm(const GmmModel& model, const FeatureSeries& series,
                         double threshold, std::optional<double> day_threshold) {
  check_fingerprint(model.pipeline_fingerprint, series);
  require_series(series, model.dim());
  const GmmScorer scorer(model);
  DayVerdict day;
  day.window_start = series.slot_starts.front();
  day.slots.resize(series.slot_starts.size());
  double total = 0.0;
  for (int t = 0; t < series.length(); ++t) {
    const Vector x = series.values.row(t).transpose();
    const Vector post = scorer.responsibilities(x);
    total += scorer.log_likelihood(x);
    SlotVerdict& slot = day.slots[static_cast<std::size_t>(t)];
    slot.slot_start = series.slot_starts[static_cast<std::size_t>(t)];
    slot.gmm_max_responsibility = post.maxCoeff();
  }
  day.gmm_total = total;
  apply_threshold(day, ModelKind::kGmm, threshold, day_threshold);
  return day;
}

DayVerdict score_day_hmm(const HmmModel& model, const FeatureSeries& series,
                         double step_threshold, bool diagnostics,
                         std::optional<double> day_threshold,
                         const RarityOptions& rarity) {
  check_fingerprint(model.pipeline_fingerprint, series);
  require_series(series, model.dim());
  const ForwardResult fwd = forward_loglik(model, series.values);
  DayVerdict day;
  day.window_start = series.slot_starts.front();
  day.slots.resize(series.slot_starts.size());
  for (int t = 0; t < series.length(); ++t) {
    SlotVerdict& slot = day.slots[static_cast<std::size_t>(t)];
    slot.slot_start = series.slot_starts[static_cast<std::size_t>(t)];
    slot.hmm_step_loglik = fwd.increments[static_cast<std::size_t>(t)];
  }
  day.hmm_total = fwd.total;
  if (diagnostics) {
    const ViterbiResult vit = viterbi(model, series.values);
    const auto dist = state_divergence(model, series.values, vit.path);
    for (std::size_t t = 0; t < day.slots.size(); ++t) {
      day.slots[t].assigned_state = vit.path[t];
      day.slots[t].mahalanobis = dist[t];
    }
    if (vit.path.size() >= 2) {
      day.transitions = transition_rarity(model, vit.path, rarity);
      for (const auto& f : day.transitions) {
        for (int step : f.steps) {
          day.slots[static_cast<std::size_t>(step)].flags |= kRareTransition;
        }
      }
    }
  }
  apply_threshold(day, ModelKind::kHmm, step_threshold, day_threshold);
  return day;
}

void apply_threshold(DayVerdict& day, ModelKind kind, double threshold,
                     std::optional<double> day_threshold) {
  if (kind == ModelKind::kGmm) {
    for (auto& slot : day.slots) {
      slot.flags &= ~static_cast<unsigned>(kGmmOutlier);
      if (slot.gmm_max_responsibility && *slot.gmm_max_responsibility < threshold) {
        slot.flags |= kGmmOutlier;
      }
    }
    day.gmm_abnormal.reset();
    if (day_threshold && day.gmm_total) day.gmm_abnormal = *day.gmm_total < *day_threshold;
  } else {
    for (auto& slot : day.slots) {
      slot.flags &= ~static_cast<unsigned>(kHmmLowLoglik);
      if (slot.hmm_step_loglik && *slot.hmm_step_loglik < threshold) {
        slot.flags |= kHmmLowLoglik;
      }
    }
    day.hmm_abnormal.reset();
    if (day_threshold && day.hmm_total) day.hmm_abnormal = *day.hmm_total < *day_threshold;
  }
}

DayVerdict merge_verdicts(const DayVerdict& gmm, const DayVerdict& hmm) {
  if (gmm.slots.size() != hmm.slots.size()) {
    throw std::invalid_argument("verdicts cover different slot grids");
  }
  DayVerdict out = hmm;
  out.gmm_total = gmm.gmm_total;
  out.gmm_abnormal = gmm.gmm_abnormal;
  for (std::size_t i = 0; i < out.slots.size(); ++i) {
    if (gmm.slots[i].slot_start != hmm.slots[i].slot_start) {
      throw std::invalid_argument("verdicts cover different slot grids");
    }
    out.slots[i].gmm_max_responsibility = gmm.slots[i].gmm_max_responsibility;
    out.slots[i].flags |= gmm.slots[i].flags & kGmmOutlier;
  }
  return out;
}

ComparisonTable compare_models(const GmmModel& gmm, const HmmModel& hmm,
                               std::span<const FeatureSeries> train_days,
                               std::span<const NamedDataset> test_sets) {
  if (gmm.pipeline_fingerprint != hmm.pipeline_fingerprint) {
    throw FingerprintMismatch(gmm.pipeline_fingerprint, hmm.pipeline_fingerprint);
  }
  auto totals = [&](std::span<const FeatureSeries> days) {
    double g = 0.0, h = 0.0;
    for (const auto& s : days) {
      check_fingerprint(gmm.pipeline_fingerprint, s);
      require_series(s, gmm.dim());
      g += loglik(gmm, s.values);
      h += forward_loglik(hmm, s.values).total;
    }
    return std::vector<double>{g, h};
  };
  ComparisonTable table;
  table.columns = {"GMM", "HMM"};
  table.rows.push_back("The same train data");
  table.values.push_back(totals(train_days));
  for (const auto& set : test_sets) {
    table.rows.push_back("Test data from " + set.name);
    table.values.push_back(totals(set.days));
  }
  return table;
}

std::string ComparisonTable::to_markdown() const {
  std::string out = "| Dataset |";
  for (const auto& c : columns) out += fmt::format(" {} |", c);
  out += "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---:|";
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += fmt::format("| {} |", rows[r]);
    for (double v : values[r]) out += fmt::format(" {:.2f} |", v);
    out += '\n';
  }
  return out;
}

std::string ComparisonTable::to_csv() const {
  std::string out = "dataset";
  for (const auto& c : columns) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += rows[r];
    for (double v : values[r]) out += fmt::format(",{}", v);
    out += '\n';
  }
  return out;
}

std::string flags_to_string(unsigned flags) {
  std::string out;
  for (const auto& f : kFlagNames) {
    if ((flags & f.flag) == 0) continue;
    if (!out.empty()) out += '|';
    out += f.name;
  }
  return out;
}

std::string verdicts_to_json(std::span<const DayVerdict> days) {
  Json doc;
  doc["version"] = kVerdictVersion;
  Json arr = Json::array();
  for (const auto& d : days) {
    Json jd;
    jd["window_start"] = d.window_start;
    jd["date"] = format_date(d.window_start);
    jd["gmm_total"] = optional_number(d.gmm_total);
    jd["hmm_total"] = optional_number(d.hmm_total);
    jd["gmm_abnormal"] = d.gmm_abnormal ? Json(*d.gmm_abnormal) : Json(nullptr);
    jd["hmm_abnormal"] = d.hmm_abnormal ? Json(*d.hmm_abnormal) : Json(nullptr);
    Json slots = Json::array();
    for (const auto& s : d.slots) {
      Json js;
      js["slot_start"] = s.slot_start;
      js["gmm_resp"] = optional_number(s.gmm_max_responsibility);
      js["hmm_ll"] = optional_number(s.hmm_step_loglik);
      js["mahalanobis"] = optional_number(s.mahalanobis);
      js["state"] = s.assigned_state ? Json(*s.assigned_state) : Json(nullptr);
      Json flags = Json::array();
      for (const auto& f : kFlagNames) {
        if (s.flags & f.flag) flags.push_back(f.name);
      }
      js["flags"] = std::move(flags);
      slots.push_back(std::move(js));
    }
    jd["slots"] = std::move(slots);
    Json trans = Json::array();
    for (const auto& t : d.transitions) {
      Json jt;
      jt["kind"] = t.kind == TransitionFlag::Kind::kRareTaken ? "rare_taken"
                                                             : "under_represented";
      jt["from"] = t.from;
      jt["to"] = t.to;
      jt["observed"] = t.observed;
      jt["outgoing"] = t.outgoing;
      jt["probability"] = number(t.probability);
      jt["lower_tail"] = number(t.lower_tail);
      jt["steps"] = t.steps;
      trans.push_back(std::move(jt));
    }
    jd["transitions"] = std::move(trans);
    arr.push_back(std::move(jd));
  }
  doc["days"] = std::move(arr);
  return doc.dump(2);
}

std::vector<DayVerdict> verdicts_from_json(std::string_view text) {
  const Json doc = internal::parse_json(text, "verdicts");
  if (internal::require(doc, "version").get<int>() != kVerdictVersion) {
    throw std::runtime_error("unsupported verdict version");
  }
  std::vector<DayVerdict> out;
  for (const auto& jd : internal::require(doc, "days")) {
    DayVerdict d;
    d.window_start = internal::require(jd, "window_start").get<std::int64_t>();
    d.gmm_total = optional_from(jd, "gmm_total");
    d.hmm_total = optional_from(jd, "hmm_total");
    if (auto it = jd.find("gmm_abnormal"); it != jd.end() && !it->is_null()) {
      d.gmm_abnormal = it->get<bool>();
    }
    if (auto it = jd.find("hmm_abnormal"); it != jd.end() && !it->is_null()) {
      d.hmm_abnormal = it->get<bool>();
    }
    for (const auto& js : internal::require(jd, "slots")) {
      SlotVerdict s;
      s.slot_start = internal::require(js, "slot_start").get<std::int64_t>();
      s.gmm_max_responsibility = optional_from(js, "gmm_resp");
      s.hmm_step_loglik = optional_from(js, "hmm_ll");
      s.mahalanobis = optional_from(js, "mahalanobis");
      if (auto it = js.find("state"); it != js.end() && !it->is_null()) {
        s.assigned_state = it->get<int>();
      }
      for (const auto& f : internal::require(js, "flags")) {
        s.flags |= flag_from_string(f.get<std::string>());
      }
      d.slots.push_back(s);
    }
    if (auto it = jd.find("transitions"); it != jd.end()) {
      for (const auto& jt : *it) {
        TransitionFlag t;
        t.kind = internal::require(jt, "kind").get<std::string>() == "rare_taken"
                     ? TransitionFlag::Kind::kRareTaken
                     : TransitionFlag::Kind::kUnderRepresented;
        t.from = internal::require(jt, "from").get<int>();
        t.to = internal::require(jt, "to").get<int>();
        t.observed = internal::require(jt, "observed").get<int>();
        t.outgoing = internal::require(jt, "outgoing").get<int>();
        t.probability = number_from(internal::require(jt, "probability"));
        t.lower_tail = number_from(internal::require(jt, "lower_tail"));
        t.steps = internal::require(jt, "steps").get<std::vector<int>>();
        d.transitions.push_back(std::move(t));
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_slot_csv(std::ostream& out, std::span<const DayVerdict> days) {
  out << "slot_start,gmm_resp,hmm_ll,mahalanobis,flags\n";
  for (const auto& d : days) {
    for (const auto& s : d.slots) {
      out << format_iso8601(s.slot_start) << ',' << csv_number(s.gmm_max_responsibility)
          << ',' << csv_number(s.hmm_step_loglik) << ',' << csv_number(s.mahalanobis)
          << ',' << flags_to_string(s.flags) << '\n';
    }
  }
}

}  // namespace wlanad
