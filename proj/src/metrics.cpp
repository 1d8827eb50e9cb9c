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

#include "loe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loe/errors.hpp"

namespace loe {

namespace {

void check_two_classes(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ConfigError("metric: scores/labels length mismatch");
    if (scores.empty()) throw MetricError("metric: empty input");
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || static_cast<std::size_t>(pos) == labels.size()) {
        throw MetricError("metric undefined: labels contain a single class");
    }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_two_classes(scores, labels);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Walk tie groups in ascending score order. Each anomaly beats every
    // negative strictly below its group and half-ties the negatives inside
    // it; accumulate twice that count so everything stays integral.
    std::uint64_t two_u = 0;
    std::uint64_t negatives_below = 0;
    std::uint64_t n_pos = 0, n_neg = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t group_pos = 0, group_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) {
                ++group_pos;
            } else {
                ++group_neg;
            }
            ++j;
        }
        two_u += group_pos * (2 * negatives_below + group_neg);
        negatives_below += group_neg;
        n_pos += group_pos;
        n_neg += group_neg;
        i = j;
    }
    return (0.5 * static_cast<double>(two_u)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double f1_top_k(std::span<const double> scores, std::span<const int> labels) {
    check_two_classes(scores, labels);

    const std::uint64_t k =
        static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::uint64_t true_positives = 0;
    for (std::uint64_t i = 0; i < k; ++i) {
        if (labels[order[i]] == 1) ++true_positives;
    }
    // With exactly k predictions, precision = recall = TP / k.
    return static_cast<double>(true_positives) / static_cast<double>(k);
}

double top_k_threshold(std::span<const double> scores, std::size_t k) {
    if (k == 0 || k > scores.size()) throw ConfigError("top_k_threshold: k out of range");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted[k - 1];
}

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

void MetricReport::aggregate() {
    std::vector<double> aucs, f1s;
    for (const SeedResult& r : seeds) {
        if (!r.failed) {
            aucs.push_back(r.auc);
            f1s.push_back(r.f1);
        }
    }
    auc_mean = mean_of(aucs);
    auc_std = stddev_of(aucs);
    f1_mean = mean_of(f1s);
    f1_std = stddev_of(f1s);
}

}  // namespace loe
