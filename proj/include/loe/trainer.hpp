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
#include <functional>
#include <string>
#include <vector>

#include "loe/adam.hpp"
#include "loe/backbones.hpp"
#include "loe/dataset.hpp"

namespace loe {

/// Label-inference strategy for one training run.
///   kBlind    - treat every sample as normal (y = 0).
///   kRefine   - per batch, drop the round(alpha*M) highest-scoring samples
///               and minimize the plain normal loss on the rest.
///   kLoeHard  - per batch, flag the top round(alpha*M) samples with y = 1
///               and minimize the joint loss.
///   kLoeSoft  - same with y = 0.5 (mean of both losses on flagged samples).
///   kGtruth   - oracle: use the hidden true labels (requires labels).
enum class Strategy { kBlind, kRefine, kLoeHard, kLoeSoft, kGtruth };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct TrainerConfig {
    Strategy strategy = Strategy::kLoeHard;
    double alpha = 0.1;      // assumed contamination ratio
    int epochs = 30;
    int warmup_epochs = 2;   // plain Blind epochs before label inference
    int batch_size = 25;
    AdamConfig adam;
    std::uint64_t seed = 0;  // drives the per-epoch shuffles
};

struct EpochStats {
    double mean_joint_loss = 0.0;  // mean over batches of the batch objective
    int label_flips = 0;           // samples whose label changed vs previous epoch
    double seconds = 0.0;          // measured wall time (not written to artifacts)
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;
};

using EpochCallback = std::function<void(int epoch, const EpochStats&)>;

/// Block coordinate descent per the mini-batch scheme: for each shuffled
/// batch, evaluate both losses, rank training scores, assign labels under
/// the strategy, then take a single Adam step on the resulting objective.
/// Warm-up epochs run Blind for kRefine/kLoeHard/kLoeSoft; kGtruth uses the
/// true labels from epoch 0. Throws DivergenceError (naming epoch and batch)
/// if the objective or a gradient turns non-finite; `on_epoch`, when set,
/// has then already seen every completed epoch.
TrainingHistory train(Backbone& model, const Dataset& data, const TrainerConfig& cfg,
                      const EpochCallback& on_epoch = {});

/// Deployment-time scores: S_test = L_n per sample. L_a is never consulted.
std::vector<double> test_scores(const Backbone& model, const Matrix& batch);

/// CSV with columns epoch, mean_joint_loss, flip_count, seconds. The seconds
/// column is zeroed so artifacts stay byte-reproducible; wall time is
/// reported on stderr by the CLI instead.
void save_history_csv(const std::string& path, const TrainingHistory& history);

}  // namespace loe
