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
#include "wlanad/gmm.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "json_util.h"

namespace wlanad {
namespace {

using internal::Json;

constexpr int kGmmVersion = 1;

std::vector<GaussianDensity> build_densities(const GmmModel& model) {
  std::vector<GaussianDensity> out;
  out.reserve(model.means.size());
  for (std::size_t k = 0; k < model.means.size(); ++k) {
    try {
      out.emplace_back(model.means[k], model.covariances[k]);
    } catch (const std::domain_error& e) {
      throw std::domain_error(fmt::format("GMM component {}: {}", k, e.what()));
    }
  }
  return out;
}

// n x M matrix of log w_k + log g_k(x_i).
Matrix log_joint_rows(const Vector& log_weights,
                      const std::vector<GaussianDensity>& densities,
                      const Matrix& data) {
  Matrix out(data.rows(), static_cast<Eigen::Index>(densities.size()));
  for (std::size_t k = 0; k < densities.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    out.col(kk) = densities[k].log_pdf_rows(data).array() + log_weights(kk);
  }
  return out;
}

Vector row_log_sum_exp(const Matrix& m) {
  Vector out(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Vector row = m.row(r).transpose();
    out(r) = log_sum_exp(row);
  }
  return out;
}

Matrix finish_covariance(const Matrix& cov, const EmOptions& options) {
  Matrix c = cov;
  if (options.diagonal) c = Matrix(cov.diagonal().asDiagonal());
  return floor_covariance(c, options.covariance_floor);
}

}  // namespace

void GmmModel::validate() const {
  const int m = components();
  if (m < 1) throw std::invalid_argument("GMM needs at least one component");
  if (static_cast<int>(means.size()) != m || static_cast<int>(covariances.size()) != m) {
    throw std::invalid_argument("GMM weights, means and covariances disagree in count");
  }
  const int d = dim();
  if (d < 1) throw std::invalid_argument("GMM dimension must be positive");
  for (int k = 0; k < m; ++k) {
    if (!(weights(k) > 0.0) || !std::isfinite(weights(k))) {
      throw std::invalid_argument(fmt::format("GMM weight {} is not positive", k));
    }
    if (means[static_cast<std::size_t>(k)].size() != d || !means[static_cast<std::size_t>(k)].allFinite()) {
      throw std::invalid_argument(fmt::format("GMM mean {} is malformed", k));
    }
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("GMM weights do not sum to one");
  }
  build_densities(*this);
}

std::string GmmModel::to_json() const {
  Json doc;
  doc["version"] = kGmmVersion;
  doc["d"] = dim();
  doc["m"] = components();
  doc["weights"] = internal::to_json(weights);
  Json ms = Json::array();
  for (const auto& mu : means) ms.push_back(internal::to_json(mu));
  doc["means"] = std::move(ms);
  Json cs = Json::array();
  for (const auto& c : covariances) cs.push_back(internal::to_json(c));
  doc["covariances"] = std::move(cs);
  doc["pipeline_fingerprint"] = pipeline_fingerprint;
  return doc.dump(2);
}

GmmModel GmmModel::from_json(std::string_view text) {
  const Json doc = internal::parse_json(text, "GMM model");
  const int version = internal::require(doc, "version").get<int>();
  if (version != kGmmVersion) {
    throw std::runtime_error(fmt::format("unsupported GMM model version {}", version));
  }
  GmmModel model;
  model.weights = internal::vector_from_json(internal::require(doc, "weights"), "weights");
  for (const auto& mu : internal::require(doc, "means")) {
    model.means.push_back(internal::vector_from_json(mu, "means"));
  }
  for (const auto& c : internal::require(doc, "covariances")) {
    model.covariances.push_back(internal::matrix_from_json(c, "covariances"));
  }
  if (auto it = doc.find("pipeline_fingerprint"); it != doc.end()) {
    model.pipeline_fingerprint = it->get<std::string>();
  }
  if (internal::require(doc, "m").get<int>() != model.components() ||
      internal::require(doc, "d").get<int>() != model.dim()) {
    throw std::runtime_error("GMM fields 'm'/'d' disagree with the parameters");
  }
  model.validate();
  return model;
}

GmmScorer::GmmScorer(const GmmModel& model)
    : log_weights_(model.weights.array().log().matrix()),
      densities_(build_densities(model)) {}

Vector GmmScorer::log_joint(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(densities_.size()));
  for (std::size_t k = 0; k < densities_.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    out(kk) = log_weights_(kk) + densities_[k].log_pdf(x);
  }
  return out;
}

double GmmScorer::log_likelihood(const Vector& x) const {
  return log_sum_exp(log_joint(x));
}

Vector GmmScorer::responsibilities(const Vector& x) const {
  return normalize_log_terms(log_joint(x));
}

double GmmScorer::max_responsibility(const Vector& x) const {
  return responsibilities(x).maxCoeff();
}

Vector normalize_log_terms(const Vector& log_terms) {
  const double norm = log_sum_exp(log_terms);
  if (!std::isfinite(norm)) {
    throw std::domain_error("log terms have no finite normalizer");
  }
  Vector out = (log_terms.array() - norm).exp().matrix();
  return out / out.sum();
}

double loglik(const GmmModel& model, const Matrix& data) {
  return per_point_loglik(model, data).sum();
}

Vector per_point_loglik(const GmmModel& model, const Matrix& data) {
  if (data.cols() != model.dim()) {
    throw std::invalid_argument(fmt::format("data has {} columns, GMM expects {}",
                                            data.cols(), model.dim()));
  }
  const Vector log_weights = model.weights.array().log().matrix();
  return row_log_sum_exp(log_joint_rows(log_weights, build_densities(model), data));
}

Vector responsibilities(const GmmModel& model, const Vector& x) {
  return GmmScorer(model).responsibilities(x);
}

GmmFit fit_em(const Matrix& data, int components, std::uint64_t seed,
              const EmOptions& options) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (components < 1) throw std::invalid_argument("GMM needs at least one component");
  if (d < 1) throw std::invalid_argument("GMM data needs at least one column");
  if (n <= components) {
    throw std::invalid_argument(fmt::format(
        "GMM fit needs more rows ({}) than components ({})", n, components));
  }
  if (!data.allFinite()) throw std::invalid_argument("GMM data has non-finite values");

  std::mt19937_64 rng(seed);
  const Matrix global_cov =
      finish_covariance(sample_covariance(data, /*unbiased=*/true), options);

  auto random_row = [&](const std::vector<Eigen::Index>& taken) {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Eigen::Index r = pick(rng);
      if (std::find(taken.begin(), taken.end(), r) == taken.end()) return r;
    }
    return pick(rng);
  };

  GmmModel model;
  model.weights = Vector::Constant(components, 1.0 / components);
  {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates: the first M entries are distinct rows.
    for (int k = 0; k < components; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
      std::swap(order[static_cast<std::size_t>(k)],
                order[static_cast<std::size_t>(pick(rng))]);
      model.means.push_back(data.row(order[static_cast<std::size_t>(k)]).transpose());
      model.covariances.push_back(global_cov);
    }
  }

  GmmFit fit;
  Matrix resp(n, components);
  for (int iter = 0;; ++iter) {
    const Vector log_weights = model.weights.array().log().matrix();
    const Matrix joint = log_joint_rows(log_weights, build_densities(model), data);
    const Vector point_ll = row_log_sum_exp(joint);
    const double ll = point_ll.sum();
    fit.trace.push_back(ll);
    if (fit.trace.size() > 1 && ll - fit.trace[fit.trace.size() - 2] < options.tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iter) break;

    resp = (joint.colwise() - point_ll).array().exp().matrix();
    const Vector mass = resp.colwise().sum().transpose();
    std::vector<Eigen::Index> collapsed;
    for (int k = 0; k < components; ++k) {
      if (mass(k) < options.min_component_mass) collapsed.push_back(k);
    }
    if (!collapsed.empty()) {
      if (fit.reseeds > 0) {
        throw std::runtime_error(fmt::format(
            "GMM component {} collapsed again after reseeding", collapsed.front()));
      }
      ++fit.reseeds;
      std::vector<Eigen::Index> taken;
      for (Eigen::Index k : collapsed) {
        const Eigen::Index r = random_row(taken);
        taken.push_back(r);
        model.means[static_cast<std::size_t>(k)] = data.row(r).transpose();
        model.covariances[static_cast<std::size_t>(k)] = global_cov;
        model.weights(k) = 1.0 / components;
      }
      model.weights /= model.weights.sum();
      // The trace restarts from the reseeded parameters.
      fit.trace.clear();
      continue;
    }

    ++fit.iterations;
    model.weights = mass / static_cast<double>(n);
    for (int k = 0; k < components; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const Vector mu = (data.transpose() * resp.col(k)) / mass(k);
      const Matrix centered = data.rowwise() - mu.transpose();
      const Matrix cov = (centered.transpose() * resp.col(k).asDiagonal() * centered) / mass(k);
      model.means[kk] = mu;
      model.covariances[kk] = finish_covariance(cov, options);
    }
  }
  fit.model = std::move(model);
  return fit;
}

}  // namespace wlanad
