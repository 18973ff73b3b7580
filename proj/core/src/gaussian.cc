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
#include "wlanad/gaussian.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wlanad {

double log_sum_exp(std::span<const double> values) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : values) max = std::max(max, v);
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double log_sum_exp(const Vector& values) {
  return log_sum_exp(std::span<const double>(values.data(),
                                             static_cast<std::size_t>(values.size())));
}

GaussianDensity::GaussianDensity(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const auto d = mean_.size();
  if (d == 0 || covariance_.rows() != d || covariance_.cols() != d) {
    throw std::domain_error("covariance shape does not match the mean");
  }
  if (!covariance_.allFinite()) {
    throw std::domain_error("covariance has non-finite entries");
  }
  const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, covariance_.cwiseAbs().maxCoeff())) {
    throw std::domain_error("covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("covariance is not positive-definite");
  }
  lower_ = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double pivot = lower_(i, i);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw std::domain_error("covariance is not positive-definite");
    }
    log_det += 2.0 * std::log(pivot);
  }
  log_normalizer_ =
      -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
}

double GaussianDensity::squared_mahalanobis(const Vector& x) const {
  if (x.size() != mean_.size()) {
    throw std::invalid_argument("observation dimension does not match the density");
  }
  const Vector z = lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return z.squaredNorm();
}

double GaussianDensity::mahalanobis(const Vector& x) const {
  return std::sqrt(squared_mahalanobis(x));
}

double GaussianDensity::log_pdf(const Vector& x) const {
  return log_normalizer_ - 0.5 * squared_mahalanobis(x);
}

Vector GaussianDensity::log_pdf_rows(const Matrix& rows) const {
  if (rows.cols() != mean_.size()) {
    throw std::invalid_argument("observation dimension does not match the density");
  }
  const Matrix centered = (rows.rowwise() - mean_.transpose()).transpose();
  const Matrix z = lower_.triangularView<Eigen::Lower>().solve(centered);
  return (log_normalizer_ - 0.5 * z.colwise().squaredNorm().array()).matrix().transpose();
}

Vector GaussianDensity::transform_standard(const Vector& z) const {
  return mean_ + lower_.triangularView<Eigen::Lower>() * z;
}

double gaussian_logpdf(const Vector& x, const Vector& mean,
                       const Matrix& covariance) {
  return GaussianDensity(mean, covariance).log_pdf(x);
}

Matrix floor_covariance(const Matrix& covariance, double floor) {
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector values = eig.eigenvalues();
  if (values.minCoeff() >= floor) return sym;
  values = values.cwiseMax(floor);
  Matrix out = eig.eigenvectors() * values.asDiagonal() *
               eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix sample_covariance(const Matrix& rows, bool unbiased) {
  const auto n = rows.rows();
  const double denom = static_cast<double>(unbiased ? n - 1 : n);
  if (denom <= 0.0) {
    throw std::invalid_argument("not enough rows for a covariance");
  }
  const Vector mean = rows.colwise().mean();
  const Matrix centered = rows.rowwise() - mean.transpose();
  return (centered.transpose() * centered) / denom;
}

}  // namespace wlanad
