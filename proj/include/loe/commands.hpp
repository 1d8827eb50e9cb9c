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

#include "loe/config.hpp"

namespace loe {

/// Command bodies behind the CLI verbs. Each is a pure function of
/// (config, input files): reruns produce byte-identical outputs. Errors are
/// reported by exception; the CLI maps them to exit codes.

/// Writes dataset.csv (+ test.csv for generated kinds) and manifest.json.
/// For csv inputs the file's normal rows are contaminated with noisy copies
/// of its anomaly rows at dataset.alpha0.
void cmd_gen(const ExperimentConfig& cfg, const std::string& out_dir);

/// Trains one model (seed = trainer.seed) and writes checkpoint.json,
/// history.csv and config.json. On divergence the history rows of completed
/// epochs are retained before the error propagates.
void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir);

/// Scores the config's test data with a checkpoint; writes scores.csv and
/// report.json (plus config.json).
void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
              const std::string& out_dir);

/// Evaluates S_test on a regular lattice for a 2D model; writes contour.csv
/// (x,y,score rows) and contour.json carrying the boundary level: the
/// configured quantile of the training scores, midpoint convention.
void cmd_contour(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                 const std::string& out_dir);

/// Runs the (alpha, alpha0) sensitivity grid; one report.json per cell under
/// cells/, plus grid.csv (rows alpha0, columns alpha, mean AUC). Completed
/// cells are skipped on rerun. Throws DataError if any cell failed.
void cmd_grid(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t workers);

/// Midpoint empirical quantile: with p*n integral, the mean of the order
/// statistics around the cut; otherwise the ceil(p*n)-th order statistic.
double quantile_midpoint(std::vector<double> values, double p);

}  // namespace loe
