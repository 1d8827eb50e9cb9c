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

#include "loe/labels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loe/errors.hpp"

namespace loe {

std::size_t LabelAssignment::flagged_count() const {
    std::size_t n = 0;
    for (double v : y) {
        if (v != 0.0) ++n;
    }
    return n;
}

std::vector<double> training_scores(std::span<const double> loss_normal,
                                    std::span<const double> loss_anomaly) {
    if (loss_normal.size() != loss_anomaly.size()) {
        throw ConfigError("training_scores: loss vectors differ in length");
    }
    std::vector<double> s(loss_normal.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = loss_normal[i] - loss_anomaly[i];
    return s;
}

LabelAssignment assign_labels(std::span<const double> scores, double alpha, LabelMode mode) {
    if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("assign_labels: alpha must be in [0, 1)");
    const std::size_t m = scores.size();
    if (m == 0) throw ConfigError("assign_labels: empty batch");

    LabelAssignment out;
    out.mode = mode;
    out.y.assign(m, 0.0);
    const std::size_t k =
        static_cast<std::size_t>(std::llround(alpha * static_cast<double>(m)));
    if (k == 0) return out;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Highest score first; equal scores keep the lowest index first.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double flag = mode == LabelMode::kHard ? 1.0 : 0.5;
    for (std::size_t i = 0; i < k; ++i) out.y[order[i]] = flag;
    return out;
}

double joint_loss(std::span<const double> loss_normal, std::span<const double> loss_anomaly,
                  const LabelAssignment& labels) {
    if (loss_normal.size() != loss_anomaly.size() || loss_normal.size() != labels.y.size()) {
        throw ConfigError("joint_loss: length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.y.size(); ++i) {
        const double y = labels.y[i];
        total += (1.0 - y) * loss_normal[i] + y * loss_anomaly[i];
    }
    return total;
}

}  // namespace loe
