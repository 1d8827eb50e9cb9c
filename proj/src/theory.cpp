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

#include "loe/theory.hpp"

#include <cmath>

#include "loe/errors.hpp"

namespace loe::theory {

RelaxationParams::RelaxationParams(double beta_in, double alpha_in)
    : beta(beta_in), alpha(alpha_in), c_alpha(std::log(alpha_in) - std::log(1.0 - alpha_in)) {
    if (beta <= 0.0) throw ConfigError("relaxation: beta must be positive");
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("relaxation: alpha must be in (0, 1)");
}

double smooth_neg_min(double loss_normal, double loss_anomaly, double beta) {
    if (beta <= 0.0) throw ConfigError("smooth_neg_min: beta must be positive");
    // beta^-1 log(e^{-b Ln} + e^{-b La}) = -min + beta^-1 log1p(e^{-b |Ln-La|});
    // the shift keeps the larger exponent at zero.
    const double lo = std::min(loss_normal, loss_anomaly);
    const double gap = std::abs(loss_normal - loss_anomaly);
    return -lo + std::log1p(std::exp(-beta * gap)) / beta;
}

double unnormalized_joint(double loss_normal, double loss_anomaly, int y, double alpha,
                          double beta) {
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("unnormalized_joint: alpha in (0,1)");
    if (y != 0 && y != 1) throw ConfigError("unnormalized_joint: y must be 0 or 1");
    const double yd = static_cast<double>(y);
    return yd * (std::log(alpha) - beta * loss_anomaly) +
           (1.0 - yd) * (std::log(1.0 - alpha) - beta * loss_normal);
}

double posterior_normal(double loss_normal, double loss_anomaly, double alpha, double beta) {
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("posterior_normal: alpha in (0,1)");
    if (beta < 0.0) throw ConfigError("posterior_normal: beta must be >= 0");
    // log-odds of the two joint terms; sigmoid evaluated on the stable side.
    const double d = beta * (loss_anomaly - loss_normal) + std::log(alpha) - std::log(1.0 - alpha);
    if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
    const double e = std::exp(d);
    return e / (1.0 + e);
}

int hard_classifier(double loss_normal, double loss_anomaly, double threshold) {
    return loss_normal < loss_anomaly + threshold ? 0 : 1;
}

std::vector<EmStep> em_iterate(std::span<const double> loss_normal,
                               std::span<const double> loss_anomaly, double alpha, double beta,
                               int steps) {
    if (loss_normal.size() != loss_anomaly.size()) {
        throw ConfigError("em_iterate: loss vectors differ in length");
    }
    if (steps < 1) throw ConfigError("em_iterate: steps must be positive");

    std::vector<EmStep> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        EmStep step;
        step.posterior_normal.resize(loss_normal.size());
        double q = 0.0;
        for (std::size_t i = 0; i < loss_normal.size(); ++i) {
            const double p = posterior_normal(loss_normal[i], loss_anomaly[i], alpha, beta);
            step.posterior_normal[i] = p;
            q += p * loss_normal[i] + (1.0 - p) * loss_anomaly[i];
        }
        step.q = q;
        out.push_back(std::move(step));
    }
    return out;
}

}  // namespace loe::theory
