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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlanad/gaussian.h"
#include "wlanad/types.h"

namespace wlanad {

// Gaussian-emission hidden Markov model.
struct HmmModel {
  Vector initial;     // pi
  Matrix transition;  // row-stochastic, transition(i, j) = P(j at t+1 | i at t)
  std::vector<Vector> means;
  std::vector<Matrix> covariances;
  std::string pipeline_fingerprint;

  int states() const { return static_cast<int>(initial.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  void validate() const;

  std::string to_json() const;
  static HmmModel from_json(std::string_view text);
};

struct GeneratedSequence {
  Matrix observations;  // T x D
  std::vector<int> states;
};

// Samples s_1 ~ pi, o_t ~ N(mu_{s_t}, Sigma_{s_t}), s_{t+1} ~ A(s_t, .).
GeneratedSequence generate(const HmmModel& model, int length,
                           std::uint64_t seed);

// log b_s(o_t) as a T x n matrix.
Matrix log_emissions(const HmmModel& model, const Matrix& sequence);

struct ForwardResult {
  double total = 0.0;
  // increments[t] = log P(o_t | o_1..o_{t-1}); they sum to total.
  std::vector<double> increments;
};

ForwardResult forward_loglik(const HmmModel& model, const Matrix& sequence);

// Log-domain forward recursion on precomputed emission terms.
ForwardResult forward_from_log_emissions(const Vector& log_initial,
                                         const Matrix& log_transition,
                                         const Matrix& log_emission_terms);

struct ViterbiResult {
  std::vector<int> path;
  double log_probability = 0.0;
};

// Most probable state path; ties go to the lower state index.
ViterbiResult viterbi(const HmmModel& model, const Matrix& sequence);

enum class HmmInit {
  kRandom,   // pi and A rows drawn uniform(0,1), then normalized
  kUniform,  // pi and A rows constant 1/n
};

struct BaumWelchOptions {
  int states = 3;
  int max_iter = 20;
  double tol = 1e-6;
  HmmInit init = HmmInit::kRandom;
  double covariance_floor = kCovarianceFloor;
  double min_state_mass = 2.0;
};

struct HmmFit {
  HmmModel model;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  int reseeds = 0;
};

// Multi-sequence Baum-Welch. Each sequence is T_i x D.
HmmFit baum_welch(std::span<const Matrix> sequences, std::uint64_t seed,
                  const BaumWelchOptions& options = {});

// Mahalanobis distance of each observation to the mean of its state on path.
std::vector<double> state_divergence(const HmmModel& model,
                                     const Matrix& sequence,
                                     std::span<const int> path);
// Same, along the Viterbi path.
std::vector<double> state_divergence(const HmmModel& model,
                                     const Matrix& sequence);

struct TransitionFlag {
  enum class Kind { kUnderRepresented, kRareTaken };

  Kind kind = Kind::kUnderRepresented;
  int from = 0;
  int to = 0;
  int observed = 0;  // c_ij
  int outgoing = 0;  // n_i
  double probability = 0.0;  // a_ij
  double lower_tail = 1.0;   // P(X <= c_ij), X ~ Binomial(n_i, a_ij)
  // Indices t such that path[t-1] == from and path[t] == to.
  std::vector<int> steps;
};

struct RarityOptions {
  double alpha = 0.05;
  double min_expected = 3.0;
  double probability_floor = 0.02;
};

std::vector<TransitionFlag> transition_rarity(const HmmModel& model,
                                              std::span<const int> path,
                                              const RarityOptions& options = {});

// P(X <= k) for X ~ Binomial(n, p).
double binomial_lower_tail(int k, int n, double p);

}  // namespace wlanad
