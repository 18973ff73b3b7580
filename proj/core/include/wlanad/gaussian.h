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

#include <span>

#include "wlanad/types.h"

namespace wlanad {

// Smallest eigenvalue any fitted covariance may have.
inline constexpr double kCovarianceFloor = 1e-6;

// log(sum(exp(v))) that returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);
double log_sum_exp(const Vector& values);

// Multivariate normal density with a cached Cholesky factor.
class GaussianDensity {
 public:
  // Throws std::domain_error when the covariance is not symmetric
  // positive-definite or the shapes disagree.
  GaussianDensity(Vector mean, Matrix covariance);

  double log_pdf(const Vector& x) const;
  // log_pdf of every row.
  Vector log_pdf_rows(const Matrix& rows) const;
  double squared_mahalanobis(const Vector& x) const;
  double mahalanobis(const Vector& x) const;

  // mean + L z for a standard-normal vector z.
  Vector transform_standard(const Vector& z) const;

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  int dim() const { return static_cast<int>(mean_.size()); }

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix lower_;
  double log_normalizer_ = 0.0;
};

double gaussian_logpdf(const Vector& x, const Vector& mean,
                       const Matrix& covariance);

// Symmetrizes and clamps every eigenvalue to at least floor.
Matrix floor_covariance(const Matrix& covariance, double floor);

// Unbiased (n-1) or maximum-likelihood (n) covariance of the rows.
Matrix sample_covariance(const Matrix& rows, bool unbiased);

}  // namespace wlanad
