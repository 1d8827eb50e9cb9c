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

namespace loe {

enum class LabelMode { kHard, kSoft };

/// Latent per-sample labels. Hard mode assigns {0,1}; soft mode assigns
/// {0,0.5}, and a 0.5-label sample contributes the exact mean of both losses
/// to the joint objective.
struct LabelAssignment {
    std::vector<double> y;
    LabelMode mode = LabelMode::kHard;

    std::size_t flagged_count() const;
};

/// Training anomaly scores: S_i = L_n(x_i) - L_a(x_i).
std::vector<double> training_scores(std::span<const double> loss_normal,
                                    std::span<const double> loss_anomaly);

/// Flags the round(alpha * M) highest-scoring samples as anomalies (1 in
/// hard mode, 0.5 in soft mode), the rest 0. Ties at the boundary break
/// toward the lowest index. This is the exact minimizer of joint_loss over
/// the constraint set.
LabelAssignment assign_labels(std::span<const double> scores, double alpha, LabelMode mode);

/// sum_i (1 - y_i) L_n(x_i) + y_i L_a(x_i).
double joint_loss(std::span<const double> loss_normal, std::span<const double> loss_anomaly,
                  const LabelAssignment& labels);

}  // namespace loe
