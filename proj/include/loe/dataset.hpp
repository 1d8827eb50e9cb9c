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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loe/rng.hpp"

namespace loe {

/// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
};

/// Feature matrix with hidden ground-truth labels (1 = anomaly) and the
/// declared contamination ratio. Labels may be absent (loaded CSVs without a
/// label column); metrics that need them refuse to run.
struct Dataset {
    Matrix features;
    std::vector<int> labels;  // empty when unavailable
    double alpha0 = 0.0;
    std::string provenance;   // "toy" | "synthetic-tabular" | "csv"

    bool has_labels() const { return !labels.empty(); }
    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
    std::size_t anomaly_count() const;
};

struct GaussianComponent {
    std::vector<double> mean;
    double variance = 1.0;  // isotropic
    double weight = 1.0;
    bool anomaly = false;
};

struct GaussianMixtureSpec {
    std::vector<GaussianComponent> components;
};

/// Draws exactly `n_normal` rows from the normal-role components and
/// `n_anomaly` rows from the anomaly-role components (component choice
/// within a role is weight-proportional per draw). Normal rows come first.
Dataset sample_mixture(const GaussianMixtureSpec& spec, std::size_t n_normal,
                       std::size_t n_anomaly, Rng& rng);

/// The 2D toy set: 90 normal samples from N([1,1], 0.07 I) and 10 anomalies
/// from an equal mixture of N([-0.25,2.5], 0.03 I) and N([-1,0.5], 0.03 I).
Dataset gen_toy(std::uint64_t seed);

GaussianMixtureSpec toy_mixture_spec();

/// 20-dimensional default: standard-normal inliers plus two anomaly clusters
/// placed symmetrically off the origin.
GaussianMixtureSpec two_cluster_tabular_spec(std::size_t dims, double separation,
                                             double anomaly_variance);

/// Builds a contaminated training set: draws k anomalies from `anomaly_pool`
/// with k/(k + normals.rows) = alpha0 after rounding, perturbs each with
/// zero-mean Gaussian noise whose per-feature variance equals the empirical
/// per-feature variance of the pool, appends them to `normals`, and shuffles.
/// Pool rows are drawn without replacement while possible, with replacement
/// once k exceeds the pool. Inputs are never mutated.
Dataset contaminate(const Matrix& normals, const Matrix& anomaly_pool, double alpha0,
                    std::uint64_t seed);

/// Stratified split by hidden label (plain split when labels are absent).
/// Per-stratum test counts are round(n_s * test_fraction); a count of zero
/// or n_s is an error.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed);

/// Strict CSV reader: header row required, rectangular numeric body. When
/// `label_column` names a header, that column becomes the 0/1 label vector.
/// Parse failures report the offending row and column.
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column = {});

/// Writer matching load_csv: feature headers f0..f{D-1}, optional trailing
/// "label" column. Doubles are written shortest-round-trip.
void save_csv(const std::string& path, const Dataset& ds);

/// Dataset manifest: {schema_version, provenance, n, d, alpha0, seed}.
void save_manifest(const std::string& path, const Dataset& ds, std::uint64_t seed);

}  // namespace loe
