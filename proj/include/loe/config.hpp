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

#include <string>
#include <vector>

#include "json.hpp"

#include "loe/experiment.hpp"

namespace loe {

/// Contour lattice over input space for 2D models.
struct ContourSpec {
    double x_min = -2.0;
    double x_max = 2.0;
    double y_min = -1.0;
    double y_max = 3.5;
    std::size_t resolution = 50;  // per axis
    double quantile = 0.9;        // boundary level over training scores
};

struct GridSpec {
    std::vector<double> alpha_axis{0.05, 0.1, 0.15};
    std::vector<double> alpha0_axis{0.1};
    std::uint64_t master_seed = 7;
    std::size_t n_seeds = 3;
};

/// Full experiment description. Parsing is strict: unknown keys anywhere are
/// a ConfigError, so typos cannot silently fall back to defaults.
struct ExperimentConfig {
    int schema_version = 1;
    DatasetSpec dataset;
    BackboneSpec backbone;
    TrainerConfig trainer;
    std::vector<std::uint64_t> eval_seeds{1, 2, 3, 4, 5};
    GridSpec grid;
    ContourSpec contour;
    std::string output_dir = "out";
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

/// Normalized echo with every default filled in; feeding it back reproduces
/// the run exactly.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace loe
