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
#include "config.h"

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

namespace wlanad::cli {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
void read_field(const Json& doc, const char* name, T& out) {
  auto it = doc.find(name);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception&) {
    throw std::invalid_argument(fmt::format("config field '{}' has the wrong type", name));
  }
}

void read_optional(const Json& doc, const char* name, std::optional<double>& out) {
  auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return;
  if (!it->is_number()) {
    throw std::invalid_argument(fmt::format("config field '{}' has the wrong type", name));
  }
  out = it->get<double>();
}

const std::set<std::string> kFields = {
    "utc_offset_seconds", "working_hours",     "working_hours_start", "working_hours_end",
    "pca_components",     "gmm_components",    "gmm_max_iter",        "gmm_tol",
    "hmm_states",         "hmm_max_iter",      "hmm_tol",             "hmm_init",
    "seed",               "gmm_threshold",     "hmm_threshold",       "gmm_day_threshold",
    "hmm_day_threshold",  "train_normal_days", "gmm_sweep",           "hmm_sweep"};

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](std::string_view field, std::string_view why) {
    throw std::invalid_argument(fmt::format("config field '{}': {}", field, why));
  };
  if (working_hours_start < 0 || working_hours_end > 24 ||
      working_hours_start >= working_hours_end) {
    fail("working_hours_end", "need 0 <= start < end <= 24");
  }
  if (pca_components < 1 || pca_components > kRawFeatureCount) {
    fail("pca_components", fmt::format("must be in [1, {}]", kRawFeatureCount));
  }
  if (gmm_components < 1) fail("gmm_components", "must be positive");
  if (gmm_max_iter < 1) fail("gmm_max_iter", "must be positive");
  if (!(gmm_tol > 0.0)) fail("gmm_tol", "must be positive");
  if (hmm_states < 1) fail("hmm_states", "must be positive");
  if (hmm_max_iter < 1) fail("hmm_max_iter", "must be positive");
  if (!(hmm_tol > 0.0)) fail("hmm_tol", "must be positive");
  if (hmm_init != "random" && hmm_init != "uniform") fail("hmm_init", "must be random or uniform");
  if (!(gmm_threshold > 0.0 && gmm_threshold < 1.0)) fail("gmm_threshold", "must be in (0, 1)");
  if (train_normal_days < 1) fail("train_normal_days", "must be positive");
  if (gmm_sweep.empty()) fail("gmm_sweep", "must not be empty");
  if (hmm_sweep.empty()) fail("hmm_sweep", "must not be empty");
}

AggregateOptions PipelineConfig::aggregate_options() const {
  AggregateOptions opts;
  if (working_hours) {
    opts.working_hours = WorkingHours{working_hours_start, working_hours_end, utc_offset_seconds};
  }
  return opts;
}

HmmInit PipelineConfig::init() const {
  return hmm_init == "uniform" ? HmmInit::kUniform : HmmInit::kRandom;
}

std::string PipelineConfig::to_json() const {
  Json doc;
  doc["utc_offset_seconds"] = utc_offset_seconds;
  doc["working_hours"] = working_hours;
  doc["working_hours_start"] = working_hours_start;
  doc["working_hours_end"] = working_hours_end;
  doc["pca_components"] = pca_components;
  doc["gmm_components"] = gmm_components;
  doc["gmm_max_iter"] = gmm_max_iter;
  doc["gmm_tol"] = gmm_tol;
  doc["hmm_states"] = hmm_states;
  doc["hmm_max_iter"] = hmm_max_iter;
  doc["hmm_tol"] = hmm_tol;
  doc["hmm_init"] = hmm_init;
  doc["seed"] = seed;
  doc["gmm_threshold"] = gmm_threshold;
  doc["hmm_threshold"] = hmm_threshold;
  doc["gmm_day_threshold"] = gmm_day_threshold ? Json(*gmm_day_threshold) : Json(nullptr);
  doc["hmm_day_threshold"] = hmm_day_threshold ? Json(*hmm_day_threshold) : Json(nullptr);
  doc["train_normal_days"] = train_normal_days;
  doc["gmm_sweep"] = gmm_sweep;
  doc["hmm_sweep"] = hmm_sweep;
  return doc.dump(2);
}

PipelineConfig PipelineConfig::from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kFields.contains(key)) {
      throw std::invalid_argument(fmt::format("unknown config field '{}'", key));
    }
  }
  PipelineConfig c;
  read_field(doc, "utc_offset_seconds", c.utc_offset_seconds);
  read_field(doc, "working_hours", c.working_hours);
  read_field(doc, "working_hours_start", c.working_hours_start);
  read_field(doc, "working_hours_end", c.working_hours_end);
  read_field(doc, "pca_components", c.pca_components);
  read_field(doc, "gmm_components", c.gmm_components);
  read_field(doc, "gmm_max_iter", c.gmm_max_iter);
  read_field(doc, "gmm_tol", c.gmm_tol);
  read_field(doc, "hmm_states", c.hmm_states);
  read_field(doc, "hmm_max_iter", c.hmm_max_iter);
  read_field(doc, "hmm_tol", c.hmm_tol);
  read_field(doc, "hmm_init", c.hmm_init);
  read_field(doc, "seed", c.seed);
  read_field(doc, "gmm_threshold", c.gmm_threshold);
  read_field(doc, "hmm_threshold", c.hmm_threshold);
  read_optional(doc, "gmm_day_threshold", c.gmm_day_threshold);
  read_optional(doc, "hmm_day_threshold", c.hmm_day_threshold);
  read_field(doc, "train_normal_days", c.train_normal_days);
  read_field(doc, "gmm_sweep", c.gmm_sweep);
  read_field(doc, "hmm_sweep", c.hmm_sweep);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read config '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path, e.what()));
  }
}

FitSeeds derive_seeds(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FitSeeds s;
  s.gmm = rng();
  s.hmm = rng();
  s.split = rng();
  return s;
}

}  // namespace wlanad::cli
