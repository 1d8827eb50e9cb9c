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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace loe {

/// ROC AUC by rank statistics: the probability that a uniformly random
/// anomaly outscores a uniformly random normal, ties counting one half.
/// Agrees exactly with the O(n^2) pairwise count (both sides reduce to the
/// same integer numerator in half-units). Throws MetricError when only one
/// class is present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// F1 with the top-k thresholding convention, k = number of true anomalies
/// in the evaluated set: predict anomaly for the k highest scores (ties
/// break toward the lower index), so precision = recall = F1 = TP / k.
double f1_top_k(std::span<const double> scores, std::span<const int> labels);

/// Score of the k-th highest sample: the decision threshold implied by the
/// top-k convention (k >= 1).
double top_k_threshold(std::span<const double> scores, std::size_t k);

struct SeedResult {
    std::uint64_t seed = 0;
    double auc = 0.0;
    double f1 = 0.0;
    double f1_threshold = 0.0;  // top-k cut used for the F1 prediction
    bool failed = false;
    std::string error;
};

/// Multi-seed aggregate. mean/std are over the successful seeds (sample
/// standard deviation; 0 when only one seed).
struct MetricReport {
    std::vector<SeedResult> seeds;
    std::size_t n_test = 0;
    double auc_mean = 0.0;
    double auc_std = 0.0;
    double f1_mean = 0.0;
    double f1_std = 0.0;

    /// Recomputes the aggregate fields from the per-seed values.
    void aggregate();
};

double mean_of(std::span<const double> values);
double stddev_of(std::span<const double> values);  // sample std, 0 for n < 2

}  // namespace loe
