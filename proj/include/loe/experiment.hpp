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

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loe/backbones.hpp"
#include "loe/dataset.hpp"
#include "loe/metrics.hpp"
#include "loe/trainer.hpp"

namespace loe {

/// How to realize a (train, test) pair for one seeded run.
///   toy                - the 2D three-component mixture, train and test
///                        drawn independently; counts follow alpha0.
///   synthetic-tabular  - standard-normal inliers plus two anomaly clusters;
///                        the training set is contaminated with noisy copies
///                        of test anomalies (per-feature noise variance
///                        equal to the pool's empirical variance).
///   csv                - load a labeled file, stratified split, then the
///                        same contamination protocol on the train half.
struct DatasetSpec {
    std::string kind = "toy";

    // toy + synthetic-tabular
    double alpha0 = 0.1;

    // synthetic-tabular
    std::size_t dims = 20;
    std::size_t n_train_normals = 2000;
    std::size_t n_test_normals = 500;
    std::size_t n_test_anomalies = 500;
    double separation = 4.0;
    double anomaly_variance = 1.0;

    // csv
    std::string path;
    std::optional<std::string> label_column;
    double test_fraction = 0.5;
    bool contaminate_train = true;
};

struct TrainTest {
    Dataset train;
    Dataset test;
};

TrainTest realize_dataset(const DatasetSpec& spec, std::uint64_t seed);

/// Model-init substream used by run_experiment and the train command for a
/// given run seed.
std::uint64_t experiment_model_seed(std::uint64_t run_seed);

struct BackboneSpec {
    std::string kind = "dsvdd_rbf";
    // dsvdd_rbf
    double recip_eps = 1e-6;
    // ntl / icl
    std::size_t n_transforms = 4;
    std::size_t hidden_dim = 0;
    std::size_t embed_dim = 0;
    std::size_t encoder_layers = 1;
    std::size_t window = 1;
    double tau = 0.1;
};

/// Builds the model for the given input dimension. dsvdd_rbf uses the toy
/// centers when the input is 2D (its only supported use here).
std::unique_ptr<Backbone> make_backbone(const BackboneSpec& spec, std::size_t input_dim,
                                        std::uint64_t seed);

/// One full pipeline per seed: realize data, init model, train, score the
/// held-out test set with S_test, compute AUC and F1. A diverging seed is
/// recorded as failed without aborting the others.
MetricReport run_experiment(const DatasetSpec& dataset, const BackboneSpec& backbone,
                            const TrainerConfig& trainer, std::span<const std::uint64_t> seeds);

struct GridCell {
    MetricReport report;
    bool failed = false;
    std::string error;
};

/// Fig-5-style sensitivity matrix: rows are true ratios alpha0, columns are
/// assumed ratios alpha. Cell seeds derive from (master_seed, cell index) so
/// any cell is reproducible in isolation.
struct SensitivityGrid {
    std::vector<double> alpha_axis;
    std::vector<double> alpha0_axis;
    std::vector<GridCell> cells;  // row-major

    GridCell& cell(std::size_t row, std::size_t col) { return cells[row * alpha_axis.size() + col]; }
    const GridCell& cell(std::size_t row, std::size_t col) const {
        return cells[row * alpha_axis.size() + col];
    }
};

std::vector<std::uint64_t> grid_cell_seeds(std::uint64_t master_seed, std::size_t cell_index,
                                           std::size_t n_seeds);

SensitivityGrid sensitivity_grid(std::span<const double> alphas, std::span<const double> alpha0s,
                                 const DatasetSpec& dataset, const BackboneSpec& backbone,
                                 const TrainerConfig& trainer, std::uint64_t master_seed,
                                 std::size_t n_seeds);

}  // namespace loe
