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

#include "loe/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "loe/errors.hpp"
#include "loe/io_util.hpp"
#include "loe/labels.hpp"

namespace loe {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::kBlind: return "blind";
        case Strategy::kRefine: return "refine";
        case Strategy::kLoeHard: return "loe_hard";
        case Strategy::kLoeSoft: return "loe_soft";
        case Strategy::kGtruth: return "gtruth";
    }
    return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "blind") return Strategy::kBlind;
    if (name == "refine") return Strategy::kRefine;
    if (name == "loe_hard") return Strategy::kLoeHard;
    if (name == "loe_soft") return Strategy::kLoeSoft;
    if (name == "gtruth") return Strategy::kGtruth;
    throw ConfigError("unknown strategy '" + name +
                      "' (expected blind|refine|loe_hard|loe_soft|gtruth)");
}

namespace {

void validate(const Dataset& data, const TrainerConfig& cfg) {
    if (data.size() == 0) throw ConfigError("train: empty dataset");
    if (cfg.alpha < 0.0 || cfg.alpha >= 1.0) throw ConfigError("train: alpha must be in [0, 1)");
    if (cfg.epochs < 1) throw ConfigError("train: epochs must be positive");
    if (cfg.warmup_epochs < 0) throw ConfigError("train: warmup_epochs must be >= 0");
    if (cfg.warmup_epochs >= cfg.epochs) throw ConfigError("train: warmup_epochs must be < epochs");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be positive");
    if (cfg.strategy == Strategy::kGtruth && !data.has_labels()) {
        throw ConfigError("train: gtruth strategy needs ground-truth labels");
    }
}

}  // namespace

TrainingHistory train(Backbone& model, const Dataset& data, const TrainerConfig& cfg,
                      const EpochCallback& on_epoch) {
    validate(data, cfg);

    Adam adam(cfg.adam, model.params());
    Rng shuffle_rng = Rng::derive(cfg.seed, 0x73687566);  // "shuf"

    const std::size_t n = data.size();
    std::vector<std::size_t> perm(n);
    std::vector<double> prev_labels(n, 0.0);
    std::vector<double> epoch_labels(n, 0.0);

    TrainingHistory history;
    history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle_rng.shuffle(perm);
        std::fill(epoch_labels.begin(), epoch_labels.end(), 0.0);

        const bool infer = epoch >= cfg.warmup_epochs;
        double loss_sum = 0.0;
        std::size_t batches = 0;

        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t m = std::min(n - start, static_cast<std::size_t>(cfg.batch_size));

            Tape tape;
            const std::vector<NodeId> leaves = model.bind_params(tape);
            std::vector<NodeId> terms(2 * m);
            std::vector<double> ln(m), la(m);
            for (std::size_t i = 0; i < m; ++i) {
                const DualLossNodes nodes =
                    model.build_dual_loss(tape, leaves, data.features.row(perm[start + i]));
                terms[2 * i] = nodes.normal;
                terms[2 * i + 1] = nodes.anomaly;
                ln[i] = tape.scalar(nodes.normal);
                la[i] = tape.scalar(nodes.anomaly);
            }

            std::vector<double> y(m, 0.0);
            switch (cfg.strategy) {
                case Strategy::kBlind:
                    break;
                case Strategy::kGtruth:
                    for (std::size_t i = 0; i < m; ++i) {
                        y[i] = static_cast<double>(data.labels[perm[start + i]]);
                    }
                    break;
                case Strategy::kRefine:
                case Strategy::kLoeHard:
                case Strategy::kLoeSoft: {
                    if (!infer) break;
                    const std::vector<double> scores = training_scores(ln, la);
                    const LabelMode mode =
                        cfg.strategy == Strategy::kLoeSoft ? LabelMode::kSoft : LabelMode::kHard;
                    y = assign_labels(scores, cfg.alpha, mode).y;
                    break;
                }
            }

            // Objective weights per sample: (1-y, y), except Refine which
            // drops flagged samples outright.
            std::vector<double> weights(2 * m);
            for (std::size_t i = 0; i < m; ++i) {
                if (cfg.strategy == Strategy::kRefine && y[i] != 0.0) {
                    weights[2 * i] = 0.0;
                    weights[2 * i + 1] = 0.0;
                } else {
                    weights[2 * i] = 1.0 - y[i];
                    weights[2 * i + 1] = y[i];
                }
                epoch_labels[perm[start + i]] = y[i];
            }

            const NodeId objective = tape.weighted_sum(terms, weights);
            const double batch_loss = tape.scalar(objective);
            if (!std::isfinite(batch_loss)) {
                throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batches) + ": non-finite joint loss");
            }

            tape.backward(objective);
            std::vector<std::vector<double>> grads;
            grads.reserve(leaves.size());
            for (NodeId leaf : leaves) grads.push_back(tape.grad(leaf));
            try {
                adam.step(model.params(), grads);
            } catch (const DivergenceError& e) {
                throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batches) + ": " + e.what());
            }

            loss_sum += batch_loss;
            ++batches;
        }

        int flips = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (epoch_labels[i] != prev_labels[i]) ++flips;
        }
        std::swap(prev_labels, epoch_labels);

        EpochStats stats;
        stats.mean_joint_loss = loss_sum / static_cast<double>(batches);
        stats.label_flips = flips;
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.epochs.push_back(stats);
        if (on_epoch) on_epoch(epoch, stats);
    }
    return history;
}

std::vector<double> test_scores(const Backbone& model, const Matrix& batch) {
    return model.batch_dual_losses(batch).first;
}

void save_history_csv(const std::string& path, const TrainingHistory& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "epoch,mean_joint_loss,flip_count,seconds\n";
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        // seconds deliberately zeroed: artifacts must be byte-reproducible.
        out << e << ',' << format_double(history.epochs[e].mean_joint_loss) << ','
            << history.epochs[e].label_flips << ",0\n";
    }
}

}  // namespace loe
