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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wlanad/gaussian.h"
#include "wlanad/types.h"

namespace wlanad {

// Mixture weights, means and covariances of an M-component mixture.
struct GmmModel {
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  // Feature pipeline this model was trained under; empty when unbound.
  std::string pipeline_fingerprint;

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  // Throws std::invalid_argument (shape, weights) or std::domain_error
  // (a covariance that is not positive-definite, naming the component).
  void validate() const;

  std::string to_json() const;
  static GmmModel from_json(std::string_view text);
};

struct EmOptions {
  int max_iter = 100;
  double tol = 1e-6;
  bool diagonal = false;
  double covariance_floor = kCovarianceFloor;
  // Components whose responsibility mass falls below this are collapsed.
  double min_component_mass = 2.0;
};

struct GmmFit {
  GmmModel model;
  // Log-likelihood before each M-step, then the final value.
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  int reseeds = 0;
};

// Maximum-likelihood mixture fit. Rows are observations. Deterministic for a
// given seed. A collapsing component is reseeded once; a second collapse
// throws std::runtime_error.
GmmFit fit_em(const Matrix& data, int components, std::uint64_t seed,
              const EmOptions& options = {});

// Fitted densities for repeated scoring.
class GmmScorer {
 public:
  explicit GmmScorer(const GmmModel& model);

  // log w_k + log g(x | mu_k, Sigma_k) for every component.
  Vector log_joint(const Vector& x) const;
  double log_likelihood(const Vector& x) const;
  Vector responsibilities(const Vector& x) const;
  double max_responsibility(const Vector& x) const;

  int components() const { return static_cast<int>(densities_.size()); }

 private:
  Vector log_weights_;
  std::vector<GaussianDensity> densities_;
};

double loglik(const GmmModel& model, const Matrix& data);
Vector per_point_loglik(const GmmModel& model, const Matrix& data);
Vector responsibilities(const GmmModel& model, const Vector& x);

// Posterior over components from unnormalized log terms.
Vector normalize_log_terms(const Vector& log_terms);

}  // namespace wlanad
