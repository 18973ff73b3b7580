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

// Independent reference implementations. Nothing here calls into wlanad so
// the tests compare two separate derivations of the same quantity.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Dense 1-D or 2-D Gaussian written out by hand (no factorization).
inline double gauss_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& cov) {
  const double ln2pi = std::log(2.0 * std::numbers::pi);
  if (x.size() == 1) {
    const double v = cov(0, 0);
    const double r = x(0) - mu(0);
    return -0.5 * (ln2pi + std::log(v) + r * r / v);
  }
  // 2x2 closed-form inverse.
  const double a = cov(0, 0), b = cov(0, 1), c = cov(1, 0), d = cov(1, 1);
  const double det = a * d - b * c;
  const double r0 = x(0) - mu(0), r1 = x(1) - mu(1);
  const double q = (d * r0 * r0 - (b + c) * r0 * r1 + a * r1 * r1) / det;
  return -0.5 * (2.0 * ln2pi + std::log(det) + q);
}

struct Hmm {
  std::vector<double> pi;
  std::vector<std::vector<double>> a;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> cov;
};

inline double log_add(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

// Calls f(path) for every state path of length T, lexicographic order.
template <typename F>
void for_each_path(int n, int T, F&& f) {
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  while (true) {
    f(path);
    int i = T - 1;
    while (i >= 0 && ++path[static_cast<std::size_t>(i)] == n) {
      path[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) return;
  }
}

// log of pi_{q1} b_{q1}(o1) prod_t a_{q(t-1) q(t)} b_{q(t)}(o_t)
inline double path_logprob(const Hmm& m, const Eigen::MatrixXd& obs,
                           const std::vector<int>& q) {
  double lp = std::log(m.pi[static_cast<std::size_t>(q[0])]);
  for (std::size_t t = 0; t < q.size(); ++t) {
    const auto s = static_cast<std::size_t>(q[t]);
    if (t > 0) lp += std::log(m.a[static_cast<std::size_t>(q[t - 1])][s]);
    lp += gauss_logpdf(obs.row(static_cast<Eigen::Index>(t)).transpose(), m.mu[s], m.cov[s]);
  }
  return lp;
}

// Eq. 6 summed over all n^T paths.
inline double brute_loglik(const Hmm& m, const Eigen::MatrixXd& obs) {
  double total = -std::numeric_limits<double>::infinity();
  for_each_path(static_cast<int>(m.pi.size()), static_cast<int>(obs.rows()),
                [&](const std::vector<int>& q) { total = log_add(total, path_logprob(m, obs, q)); });
  return total;
}

inline std::vector<int> brute_viterbi(const Hmm& m, const Eigen::MatrixXd& obs) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  for_each_path(static_cast<int>(m.pi.size()), static_cast<int>(obs.rows()),
                [&](const std::vector<int>& q) {
                  const double lp = path_logprob(m, obs, q);
                  if (arg.empty() || lp > best) {
                    best = lp;
                    arg = q;
                  }
                });
  return arg;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double s = 0.0;
  for (auto& v : p) s += (v = u(rng));
  for (auto& v : p) v /= s;
  return p;
}

inline Hmm random_hmm(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> mean(-3.0, 3.0);
  std::uniform_real_distribution<double> var(0.3, 2.0);
  std::uniform_real_distribution<double> rho(-0.6, 0.6);
  Hmm m;
  m.pi = random_simplex(rng, n);
  for (int i = 0; i < n; ++i) {
    m.a.push_back(random_simplex(rng, n));
    Eigen::VectorXd mu(d);
    for (int k = 0; k < d; ++k) mu(k) = mean(rng);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) c(k, k) = var(rng);
    if (d == 2) c(0, 1) = c(1, 0) = rho(rng) * std::sqrt(c(0, 0) * c(1, 1));
    m.mu.push_back(mu);
    m.cov.push_back(c);
  }
  return m;
}

// Cyclic Jacobi rotations; eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-26) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev;
  for (Eigen::Index i = 0; i < n; ++i) ev.push_back(a(i, i));
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

}  // namespace oracle
