// Copyright 2026 The LOE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

namespace loe::theory {

/// Smooth-max relaxation parameters: inverse temperature beta and the
/// Bernoulli prior ratio alpha with its log-odds C_alpha.
struct RelaxationParams {
    double beta;
    double alpha;
    double c_alpha;  // log(alpha) - log(1 - alpha), fixed at construction

    RelaxationParams(double beta_in, double alpha_in);
};

/// beta^-1 * log(exp(-beta*L_n) + exp(-beta*L_a)), evaluated with the
/// max-shift so beta up to 1e8 cannot overflow. Sandwich bound:
/// -min(L_n,L_a) <= result <= -min(L_n,L_a) + log(2)/beta.
double smooth_neg_min(double loss_normal, double loss_anomaly, double beta);

/// Log of the un-normalized joint over (x, y):
/// y*(log(alpha) - beta*L_a) + (1-y)*(log(1-alpha) - beta*L_n).
double unnormalized_joint(double loss_normal, double loss_anomaly, int y, double alpha,
                          double beta);

/// Posterior probability of the normal label,
///   exp(-beta*L_n + log alpha) /
///     (exp(-beta*L_n + log alpha) + exp(-beta*L_a + log(1-alpha))),
/// computed as a numerically stable sigmoid of the log-odds difference.
/// The alpha placement follows the source formulation verbatim; at beta = 0
/// it returns alpha regardless of the losses.
double posterior_normal(double loss_normal, double loss_anomaly, double alpha, double beta);

/// Deterministic beta -> infinity classifier: 0 (normal) iff
/// L_n < L_a + threshold, else 1. Exact ties classify as anomalous.
int hard_classifier(double loss_normal, double loss_anomaly, double threshold);

struct EmStep {
    double q;  // expected joint loss under the posterior
    std::vector<double> posterior_normal;
};

/// E-step bookkeeping on frozen loss vectors: each step recomputes the
/// posterior per sample and the expected joint
///   Q = sum_i p_i * L_n(x_i) + (1 - p_i) * L_a(x_i),
/// the expectation of the mixture objective under independent posteriors
/// p_i = posterior_normal(...). With the losses frozen the sequence is
/// constant; the value is the invariant under test.
std::vector<EmStep> em_iterate(std::span<const double> loss_normal,
                               std::span<const double> loss_anomaly, double alpha, double beta,
                               int steps);

}  // namespace loe::theory
