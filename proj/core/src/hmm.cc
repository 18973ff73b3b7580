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
#include "wlanad/hmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "json_util.h"

namespace wlanad {
namespace {

using internal::Json;

constexpr int kHmmVersion = 1;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<GaussianDensity> build_densities(const HmmModel& model) {
  std::vector<GaussianDensity> out;
  out.reserve(model.means.size());
  for (std::size_t s = 0; s < model.means.size(); ++s) {
    try {
      out.emplace_back(model.means[s], model.covariances[s]);
    } catch (const std::domain_error& e) {
      throw std::domain_error(fmt::format("HMM state {}: {}", s, e.what()));
    }
  }
  return out;
}

Matrix log_of(const Matrix& m) { return m.array().log().matrix(); }
Vector log_of(const Vector& v) { return v.array().log().matrix(); }

void check_sequence(const HmmModel& model, const Matrix& sequence) {
  if (sequence.rows() == 0) throw std::invalid_argument("empty observation sequence");
  if (sequence.cols() != model.dim()) {
    throw std::invalid_argument(fmt::format(
        "observation dimension {} does not match the model dimension {}",
        sequence.cols(), model.dim()));
  }
}

int sample_index(const Vector& probabilities, double u) {
  double acc = 0.0;
  const int n = static_cast<int>(probabilities.size());
  for (int i = 0; i < n; ++i) {
    acc += probabilities(i);
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the cumulative sum.
  for (int i = n - 1; i >= 0; --i) {
    if (probabilities(i) > 0.0) return i;
  }
  return n - 1;
}

// Normalized log-domain forward-backward quantities for one sequence.
struct Posterior {
  Matrix gamma;  // T x n
  Matrix xi_sum;  // n x n, summed over t
  double loglik = 0.0;
};

Posterior forward_backward(const Matrix& log_a, const Vector& log_pi,
                           const Matrix& log_b) {
  const Eigen::Index t_len = log_b.rows();
  const Eigen::Index n = log_b.cols();
  Matrix alpha(t_len, n);  // log, normalized per step
  Vector scale(t_len);     // log normalizers
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (t == 0) {
        alpha(0, j) = log_pi(j) + log_b(0, j);
      } else {
        const Vector terms = alpha.row(t - 1).transpose() + log_a.col(j);
        alpha(t, j) = log_sum_exp(terms) + log_b(t, j);
      }
    }
    const Vector row = alpha.row(t).transpose();
    scale(t) = log_sum_exp(row);
    if (!std::isfinite(scale(t))) {
      throw std::domain_error("observation sequence has zero likelihood");
    }
    alpha.row(t).array() -= scale(t);
  }
  Matrix beta = Matrix::Zero(t_len, n);
  for (Eigen::Index t = t_len - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector terms = log_a.row(i).transpose() + log_b.row(t + 1).transpose() +
                           beta.row(t + 1).transpose();
      beta(t, i) = log_sum_exp(terms) - scale(t + 1);
    }
  }
  Posterior p;
  p.loglik = scale.sum();
  p.gamma = (alpha + beta).array().exp().matrix();
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const double s = p.gamma.row(t).sum();
    if (s > 0.0) p.gamma.row(t) /= s;
  }
  p.xi_sum = Matrix::Zero(n, n);
  for (Eigen::Index t = 0; t + 1 < t_len; ++t) {
    Matrix xi(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        xi(i, j) = alpha(t, i) + log_a(i, j) + log_b(t + 1, j) + beta(t + 1, j) -
                   scale(t + 1);
      }
    }
    Matrix e = xi.array().exp().matrix();
    const double s = e.sum();
    if (s > 0.0) e /= s;
    p.xi_sum += e;
  }
  return p;
}

struct ColumnStats {
  Vector mean;
  Vector sd;
};

ColumnStats column_stats(std::span<const Matrix> sequences) {
  const Eigen::Index d = sequences.front().cols();
  Vector sum = Vector::Zero(d), sq = Vector::Zero(d);
  double count = 0.0;
  for (const Matrix& s : sequences) {
    sum += s.colwise().sum().transpose();
    sq += s.array().square().colwise().sum().matrix().transpose();
    count += static_cast<double>(s.rows());
  }
  ColumnStats stats;
  stats.mean = sum / count;
  stats.sd = (sq / count - stats.mean.cwiseProduct(stats.mean)).cwiseMax(0.0).cwiseSqrt();
  return stats;
}

void draw_emission(std::mt19937_64& rng, const ColumnStats& stats, double floor,
                   Vector& mean, Matrix& cov) {
  const Eigen::Index d = stats.mean.size();
  mean.resize(d);
  cov = Matrix::Zero(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double mu = stats.mean(c);
    const double sigma = stats.sd(c);
    std::uniform_real_distribution<double> m(mu - 3.0 * sigma, mu + 3.0 * sigma);
    mean(c) = sigma > 0.0 ? m(rng) : mu;
    const double var = sigma * sigma;
    std::uniform_real_distribution<double> v(0.5 * var, 3.0 * var);
    cov(c, c) = std::max(var > 0.0 ? v(rng) : 0.0, floor);
  }
}

Vector draw_distribution(std::mt19937_64& rng, Eigen::Index n, HmmInit init) {
  if (init == HmmInit::kUniform) return Vector::Constant(n, 1.0 / static_cast<double>(n));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Strictly positive so every transition stays reachable.
    do {
      v(i) = u(rng);
    } while (v(i) <= 0.0);
  }
  return v / v.sum();
}

}  // namespace

void HmmModel::validate() const {
  const int n = states();
  if (n < 1) throw std::invalid_argument("HMM needs at least one state");
  if (transition.rows() != n || transition.cols() != n ||
      static_cast<int>(means.size()) != n || static_cast<int>(covariances.size()) != n) {
    throw std::invalid_argument("HMM parameters disagree in state count");
  }
  if (dim() < 1) throw std::invalid_argument("HMM dimension must be positive");
  if (!initial.allFinite() || (initial.array() < 0.0).any() ||
      std::abs(initial.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("HMM initial distribution is not a probability vector");
  }
  for (int i = 0; i < n; ++i) {
    if (!transition.row(i).allFinite() || (transition.row(i).array() < 0.0).any() ||
        std::abs(transition.row(i).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument(fmt::format("HMM transition row {} is not stochastic", i));
    }
    if (means[static_cast<std::size_t>(i)].size() != dim()) {
      throw std::invalid_argument(fmt::format("HMM mean {} has the wrong dimension", i));
    }
  }
  build_densities(*this);
}

std::string HmmModel::to_json() const {
  Json doc;
  doc["version"] = kHmmVersion;
  doc["n"] = states();
  doc["d"] = dim();
  doc["pi"] = internal::to_json(initial);
  doc["a"] = internal::to_json(transition);
  Json ms = Json::array();
  for (const auto& mu : means) ms.push_back(internal::to_json(mu));
  doc["means"] = std::move(ms);
  Json cs = Json::array();
  for (const auto& c : covariances) cs.push_back(internal::to_json(c));
  doc["covariances"] = std::move(cs);
  doc["pipeline_fingerprint"] = pipeline_fingerprint;
  return doc.dump(2);
}

HmmModel HmmModel::from_json(std::string_view text) {
  const Json doc = internal::parse_json(text, "HMM model");
  const int version = internal::require(doc, "version").get<int>();
  if (version != kHmmVersion) {
    throw std::runtime_error(fmt::format("unsupported HMM model version {}", version));
  }
  HmmModel model;
  model.initial = internal::vector_from_json(internal::require(doc, "pi"), "pi");
  model.transition = internal::matrix_from_json(internal::require(doc, "a"), "a");
  for (const auto& mu : internal::require(doc, "means")) {
    model.means.push_back(internal::vector_from_json(mu, "means"));
  }
  for (const auto& c : internal::require(doc, "covariances")) {
    model.covariances.push_back(internal::matrix_from_json(c, "covariances"));
  }
  if (auto it = doc.find("pipeline_fingerprint"); it != doc.end()) {
    model.pipeline_fingerprint = it->get<std::string>();
  }
  if (internal::require(doc, "n").get<int>() != model.states() ||
      internal::require(doc, "d").get<int>() != model.dim()) {
    throw std::runtime_error("HMM fields 'n'/'d' disagree with the parameters");
  }
  model.validate();
  return model;
}

GeneratedSequence generate(const HmmModel& model, int length, std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("sequence length must be >= 1");
  model.validate();
  const auto densities = build_densities(model);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  GeneratedSequence out;
  out.observations.resize(length, model.dim());
  out.states.reserve(static_cast<std::size_t>(length));
  int state = sample_index(model.initial, u(rng));
  for (int t = 0; t < length; ++t) {
    out.states.push_back(state);
    Vector noise(model.dim());
    for (Eigen::Index c = 0; c < noise.size(); ++c) noise(c) = z(rng);
    out.observations.row(t) =
        densities[static_cast<std::size_t>(state)].transform_standard(noise).transpose();
    const Vector row = model.transition.row(state).transpose();
    state = sample_index(row, u(rng));
  }
  return out;
}

Matrix log_emissions(const HmmModel& model, const Matrix& sequence) {
  check_sequence(model, sequence);
  const auto densities = build_densities(model);
  Matrix out(sequence.rows(), model.states());
  for (std::size_t s = 0; s < densities.size(); ++s) {
    out.col(static_cast<Eigen::Index>(s)) = densities[s].log_pdf_rows(sequence);
  }
  return out;
}

ForwardResult forward_from_log_emissions(const Vector& log_initial,
                                         const Matrix& log_transition,
                                         const Matrix& log_emission_terms) {
  const Eigen::Index t_len = log_emission_terms.rows();
  const Eigen::Index n = log_emission_terms.cols();
  if (t_len == 0) throw std::invalid_argument("empty observation sequence");
  if (log_initial.size() != n || log_transition.rows() != n || log_transition.cols() != n) {
    throw std::invalid_argument("forward recursion inputs disagree in state count");
  }
  ForwardResult result;
  result.increments.reserve(static_cast<std::size_t>(t_len));
  Vector alpha = log_initial + log_emission_terms.row(0).transpose();
  Vector next(n);
  for (Eigen::Index t = 0;; ++t) {
    const double norm = log_sum_exp(alpha);
    result.increments.push_back(norm);
    if (!std::isfinite(norm)) {
      // Impossible observation: every later step is impossible as well.
      result.increments.resize(static_cast<std::size_t>(t_len), kNegInf);
      result.total = kNegInf;
      return result;
    }
    alpha.array() -= norm;
    if (t + 1 == t_len) break;
    for (Eigen::Index j = 0; j < n; ++j) {
      next(j) = log_sum_exp(Vector(alpha + log_transition.col(j))) +
                log_emission_terms(t + 1, j);
    }
    alpha.swap(next);
  }
  double total = 0.0;
  for (double inc : result.increments) total += inc;
  result.total = total;
  return result;
}

ForwardResult forward_loglik(const HmmModel& model, const Matrix& sequence) {
  return forward_from_log_emissions(log_of(model.initial), log_of(model.transition),
                                    log_emissions(model, sequence));
}

ViterbiResult viterbi(const HmmModel& model, const Matrix& sequence) {
  const Matrix log_b = log_emissions(model, sequence);
  const Matrix log_a = log_of(model.transition);
  const Eigen::Index t_len = log_b.rows();
  const Eigen::Index n = log_b.cols();
  Matrix delta(t_len, n);
  Eigen::MatrixXi back(t_len, n);
  delta.row(0) = log_of(model.initial).transpose() + log_b.row(0);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double cand = delta(t - 1, i) + log_a(i, j);
        if (cand > best) {
          best = cand;
          arg = static_cast<int>(i);
        }
      }
      delta(t, j) = best + log_b(t, j);
      back(t, j) = arg;
    }
  }
  ViterbiResult result;
  double best = kNegInf;
  int arg = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (delta(t_len - 1, j) > best) {
      best = delta(t_len - 1, j);
      arg = static_cast<int>(j);
    }
  }
  result.log_probability = best;
  result.path.assign(static_cast<std::size_t>(t_len), 0);
  result.path.back() = arg;
  for (Eigen::Index t = t_len - 1; t > 0; --t) {
    arg = back(t, arg);
    result.path[static_cast<std::size_t>(t - 1)] = arg;
  }
  return result;
}

HmmFit baum_welch(std::span<const Matrix> sequences, std::uint64_t seed,
                  const BaumWelchOptions& options) {
  const int n = options.states;
  if (n < 1) throw std::invalid_argument("HMM needs at least one state");
  if (sequences.empty()) throw std::invalid_argument("Baum-Welch needs at least one sequence");
  const Eigen::Index d = sequences.front().cols();
  if (d < 1) throw std::invalid_argument("observations need at least one column");
  Eigen::Index total_obs = 0;
  for (const Matrix& s : sequences) {
    if (s.cols() != d) {
      throw std::invalid_argument("all sequences must share one dimension");
    }
    if (s.rows() == 0) throw std::invalid_argument("empty observation sequence");
    if (!s.allFinite()) throw std::invalid_argument("observations must be finite");
    total_obs += s.rows();
  }
  if (total_obs <= n) {
    throw std::invalid_argument(fmt::format(
        "Baum-Welch needs more observations ({}) than states ({})", total_obs, n));
  }

  std::mt19937_64 rng(seed);
  const ColumnStats stats = column_stats(sequences);

  HmmModel model;
  model.means.resize(static_cast<std::size_t>(n));
  model.covariances.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    draw_emission(rng, stats, options.covariance_floor,
                  model.means[static_cast<std::size_t>(s)],
                  model.covariances[static_cast<std::size_t>(s)]);
  }
  model.initial = draw_distribution(rng, n, options.init);
  model.transition.resize(n, n);
  for (int i = 0; i < n; ++i) {
    model.transition.row(i) = draw_distribution(rng, n, options.init).transpose();
  }

  HmmFit fit;
  for (int iter = 0;; ++iter) {
    const Matrix log_a = log_of(model.transition);
    const Vector log_pi = log_of(model.initial);
    const auto densities = build_densities(model);

    double ll = 0.0;
    Vector first = Vector::Zero(n);
    Matrix xi = Matrix::Zero(n, n);
    Vector from_mass = Vector::Zero(n);  // gamma summed over t < T
    Vector mass = Vector::Zero(n);
    std::vector<Matrix> gammas;
    gammas.reserve(sequences.size());
    for (const Matrix& seq : sequences) {
      Matrix log_b(seq.rows(), n);
      for (int s = 0; s < n; ++s) {
        log_b.col(s) = densities[static_cast<std::size_t>(s)].log_pdf_rows(seq);
      }
      Posterior p = forward_backward(log_a, log_pi, log_b);
      ll += p.loglik;
      first += p.gamma.row(0).transpose();
      xi += p.xi_sum;
      mass += p.gamma.colwise().sum().transpose();
      from_mass += p.gamma.topRows(seq.rows() - 1).colwise().sum().transpose();
      gammas.push_back(std::move(p.gamma));
    }
    fit.trace.push_back(ll);
    if (fit.trace.size() > 1 && ll - fit.trace[fit.trace.size() - 2] < options.tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iter) break;

    std::vector<int> starved;
    for (int s = 0; s < n; ++s) {
      if (mass(s) < options.min_state_mass) starved.push_back(s);
    }
    if (!starved.empty()) {
      if (fit.reseeds > 0) {
        throw std::runtime_error(fmt::format(
            "HMM state {} starved of responsibility again after reseeding",
            starved.front()));
      }
      ++fit.reseeds;
      for (int s : starved) {
        draw_emission(rng, stats, options.covariance_floor,
                      model.means[static_cast<std::size_t>(s)],
                      model.covariances[static_cast<std::size_t>(s)]);
      }
      fit.trace.clear();
      continue;
    }

    ++fit.iterations;
    model.initial = first / first.sum();
    for (int i = 0; i < n; ++i) {
      if (from_mass(i) > 0.0 && xi.row(i).sum() > 0.0) {
        model.transition.row(i) = xi.row(i) / xi.row(i).sum();
      }
    }
    for (int s = 0; s < n; ++s) {
      Vector mu = Vector::Zero(d);
      for (std::size_t q = 0; q < sequences.size(); ++q) {
        mu += sequences[q].transpose() * gammas[q].col(s);
      }
      mu /= mass(s);
      Matrix cov = Matrix::Zero(d, d);
      for (std::size_t q = 0; q < sequences.size(); ++q) {
        const Matrix centered = sequences[q].rowwise() - mu.transpose();
        cov += centered.transpose() * gammas[q].col(s).asDiagonal() * centered;
      }
      cov /= mass(s);
      model.means[static_cast<std::size_t>(s)] = mu;
      model.covariances[static_cast<std::size_t>(s)] =
          floor_covariance(cov, options.covariance_floor);
    }
  }
  fit.model = std::move(model);
  return fit;
}

std::vector<double> state_divergence(const HmmModel& model, const Matrix& sequence,
                                     std::span<const int> path) {
  check_sequence(model, sequence);
  if (path.size() != static_cast<std::size_t>(sequence.rows())) {
    throw std::invalid_argument("state path length differs from the sequence length");
  }
  const auto densities = build_densities(model);
  std::vector<double> out;
  out.reserve(path.size());
  for (std::size_t t = 0; t < path.size(); ++t) {
    const int s = path[t];
    if (s < 0 || s >= model.states()) throw std::invalid_argument("state out of range");
    out.push_back(densities[static_cast<std::size_t>(s)].mahalanobis(
        sequence.row(static_cast<Eigen::Index>(t)).transpose()));
  }
  return out;
}

std::vector<double> state_divergence(const HmmModel& model, const Matrix& sequence) {
  const ViterbiResult v = viterbi(model, sequence);
  return state_divergence(model, sequence, v.path);
}

double binomial_lower_tail(int k, int n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial parameters out of range");
  }
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(k) + 1);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(n + 1.0);
  for (int i = 0; i <= k; ++i) {
    terms.push_back(log_n_fact - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                    i * log_p + (n - i) * log_q);
  }
  return std::min(1.0, std::exp(log_sum_exp(terms)));
}

std::vector<TransitionFlag> transition_rarity(const HmmModel& model,
                                              std::span<const int> path,
                                              const RarityOptions& options) {
  const int n = model.states();
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
  std::vector<std::vector<std::vector<int>>> steps(
      static_cast<std::size_t>(n), std::vector<std::vector<int>>(static_cast<std::size_t>(n)));
  for (std::size_t t = 1; t < path.size(); ++t) {
    const int i = path[t - 1];
    const int j = path[t];
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw std::invalid_argument("state out of range in path");
    }
    counts(i, j) += 1;
    steps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].push_back(
        static_cast<int>(t));
  }
  std::vector<TransitionFlag> flags;
  for (int i = 0; i < n; ++i) {
    const int outgoing = counts.row(i).sum();
    if (outgoing == 0) continue;
    for (int j = 0; j < n; ++j) {
      const double a = model.transition(i, j);
      const int c = counts(i, j);
      TransitionFlag f;
      f.from = i;
      f.to = j;
      f.observed = c;
      f.outgoing = outgoing;
      f.probability = a;
      f.lower_tail = binomial_lower_tail(c, outgoing, a);
      f.steps = steps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (f.lower_tail < options.alpha && outgoing * a >= options.min_expected) {
        f.kind = TransitionFlag::Kind::kUnderRepresented;
        flags.push_back(f);
      }
      if (c > 0 && a < options.probability_floor) {
        f.kind = TransitionFlag::Kind::kRareTaken;
        flags.push_back(f);
      }
    }
  }
  return flags;
}

}  // namespace wlanad
