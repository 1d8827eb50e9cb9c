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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "loe/commands.hpp"
#include "loe/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitMetric = 5;

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy;
    std::optional<double> alpha;
    std::optional<double> alpha0;
    std::optional<int> epochs;
    std::optional<int> batch_size;
    std::optional<double> lr;
    std::optional<std::string> backbone;
    bool toy = false;
    bool synthetic = false;
    std::string csv_path;
    std::string label_column;
    std::optional<double> contaminate_ratio;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-c,--config", f.config_path, "JSON config file");
    cmd->add_option("-o,--output", f.output_dir, "output directory (overrides config)");
    cmd->add_option("--seed", f.seed, "run seed (overrides trainer.seed)");
    cmd->add_option("--strategy", f.strategy, "blind|refine|loe_hard|loe_soft|gtruth");
    cmd->add_option("--alpha", f.alpha, "assumed contamination ratio");
    cmd->add_option("--alpha0", f.alpha0, "true contamination ratio");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
    cmd->add_option("--backbone", f.backbone, "dsvdd_rbf|ntl|icl");
    cmd->add_flag("--toy", f.toy, "use the 2D toy dataset");
    cmd->add_flag("--synthetic", f.synthetic, "use the synthetic tabular dataset");
    cmd->add_option("--csv", f.csv_path, "use a CSV dataset at this path");
    cmd->add_option("--label-column", f.label_column, "CSV label column name");
    cmd->add_option("--contaminate", f.contaminate_ratio,
                    "contamination ratio for generated training data");
}

loe::ExperimentConfig build_config(const CommonFlags& f) {
    loe::ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = loe::load_config_file(f.config_path);
    if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
    if (f.seed) cfg.trainer.seed = *f.seed;
    if (f.strategy) cfg.trainer.strategy = loe::strategy_from_name(*f.strategy);
    if (f.alpha) cfg.trainer.alpha = *f.alpha;
    if (f.alpha0) cfg.dataset.alpha0 = *f.alpha0;
    if (f.epochs) cfg.trainer.epochs = *f.epochs;
    if (f.batch_size) cfg.trainer.batch_size = *f.batch_size;
    if (f.lr) cfg.trainer.adam.lr = *f.lr;
    if (f.backbone) cfg.backbone.kind = *f.backbone;
    if (f.toy) cfg.dataset.kind = "toy";
    if (f.synthetic) cfg.dataset.kind = "synthetic-tabular";
    if (!f.csv_path.empty()) {
        cfg.dataset.kind = "csv";
        cfg.dataset.path = f.csv_path;
    }
    if (!f.label_column.empty()) cfg.dataset.label_column = f.label_column;
    if (f.contaminate_ratio) cfg.dataset.alpha0 = *f.contaminate_ratio;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "loe: anomaly detection on contaminated training data.\n"
        "Trains dual-loss backbones with latent-label inference and runs\n"
        "reproducible, config-driven experiments."};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 ok, 1 internal error, 2 config error, 3 data error,\n"
        "4 training divergence, 5 undefined metric.");

    CommonFlags gen_f, train_f, eval_f, contour_f, grid_f;
    std::string eval_checkpoint, contour_checkpoint;
    std::size_t grid_workers = 1;

    CLI::App* gen = app.add_subcommand("gen", "generate a dataset (CSV + manifest)");
    add_common(gen, gen_f);

    CLI::App* train = app.add_subcommand("train", "train a model (checkpoint + history)");
    add_common(train, train_f);

    CLI::App* eval = app.add_subcommand("eval", "score a test set with a checkpoint");
    add_common(eval, eval_f);
    eval->add_option("-m,--checkpoint", eval_checkpoint, "checkpoint.json path")->required();

    CLI::App* contour = app.add_subcommand("contour", "dump S_test over a 2D lattice");
    add_common(contour, contour_f);
    contour->add_option("-m,--checkpoint", contour_checkpoint, "checkpoint.json path")->required();

    CLI::App* grid = app.add_subcommand("grid", "run the (alpha, alpha0) sensitivity grid");
    add_common(grid, grid_f);
    grid->add_option("--workers", grid_workers, "parallel cell workers");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const loe::ExperimentConfig cfg = build_config(gen_f);
            loe::cmd_gen(cfg, cfg.output_dir);
        } else if (train->parsed()) {
            const loe::ExperimentConfig cfg = build_config(train_f);
            loe::cmd_train(cfg, cfg.output_dir);
        } else if (eval->parsed()) {
            const loe::ExperimentConfig cfg = build_config(eval_f);
            loe::cmd_eval(cfg, eval_checkpoint, cfg.output_dir);
        } else if (contour->parsed()) {
            const loe::ExperimentConfig cfg = build_config(contour_f);
            loe::cmd_contour(cfg, contour_checkpoint, cfg.output_dir);
        } else if (grid->parsed()) {
            const loe::ExperimentConfig cfg = build_config(grid_f);
            loe::cmd_grid(cfg, cfg.output_dir, grid_workers);
        }
    } catch (const loe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const loe::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const loe::DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const loe::MetricError& e) {
        std::cerr << "metric error: " << e.what() << '\n';
        return kExitMetric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitOk;
}
