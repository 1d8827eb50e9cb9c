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

#include "loe/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "loe/errors.hpp"
#include "loe/io_util.hpp"

namespace loe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

void write_config_echo(const ExperimentConfig& cfg, const std::string& out_dir) {
    write_text_file((fs::path(out_dir) / "config.json").string(),
                    config_to_json(cfg).dump(2) + "\n");
}

json report_to_json(const MetricReport& report) {
    json j;
    j["n_test"] = report.n_test;
    j["auc_mean"] = report.auc_mean;
    j["auc_std"] = report.auc_std;
    j["f1_mean"] = report.f1_mean;
    j["f1_std"] = report.f1_std;
    json seeds = json::array();
    for (const SeedResult& r : report.seeds) {
        json s;
        s["seed"] = r.seed;
        s["failed"] = r.failed;
        if (r.failed) {
            s["error"] = r.error;
        } else {
            s["auc"] = r.auc;
            s["f1"] = r.f1;
            s["f1_threshold"] = r.f1_threshold;
        }
        seeds.push_back(std::move(s));
    }
    j["seeds"] = std::move(seeds);
    return j;
}

// Flat per-seed rows; grid cells prepend their (alpha0, alpha) coordinates.
void write_report_csv(std::ofstream& out, const MetricReport& report,
                      const std::string& row_prefix) {
    for (const SeedResult& r : report.seeds) {
        out << row_prefix << r.seed << ',';
        if (r.failed) {
            out << "nan,nan,nan,1\n";
        } else {
            out << format_double(r.auc) << ',' << format_double(r.f1) << ','
                << format_double(r.f1_threshold) << ",0\n";
        }
    }
}

}  // namespace

double quantile_midpoint(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("quantile: empty sample");
    if (p <= 0.0 || p >= 1.0) throw ConfigError("quantile: p must be in (0, 1)");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size());
    const double floor_pos = std::floor(pos);
    if (pos == floor_pos) {
        const std::size_t i = static_cast<std::size_t>(floor_pos);
        if (i == 0) return values[0];
        if (i >= values.size()) return values.back();
        return 0.5 * (values[i - 1] + values[i]);
    }
    return values[static_cast<std::size_t>(floor_pos)];
}

void cmd_gen(const ExperimentConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    const std::uint64_t seed = cfg.trainer.seed;

    if (cfg.dataset.kind == "csv") {
        // Contaminate the file in place: normal rows are the base, anomaly
        // rows the pool.
        Dataset full = load_csv(cfg.dataset.path, cfg.dataset.label_column);
        if (!full.has_labels()) throw DataError("gen: csv contamination needs a label column");
        Matrix normals(full.size() - full.anomaly_count(), full.dim());
        Matrix pool(full.anomaly_count(), full.dim());
        std::size_t rn = 0, ra = 0;
        for (std::size_t i = 0; i < full.size(); ++i) {
            const auto src = full.features.row(i);
            if (full.labels[i] == 1) {
                std::copy(src.begin(), src.end(), pool.data.begin() + static_cast<std::ptrdiff_t>(ra++ * full.dim()));
            } else {
                std::copy(src.begin(), src.end(), normals.data.begin() + static_cast<std::ptrdiff_t>(rn++ * full.dim()));
            }
        }
        Dataset out = contaminate(normals, pool, cfg.dataset.alpha0, seed);
        save_csv((fs::path(out_dir) / "dataset.csv").string(), out);
        save_manifest((fs::path(out_dir) / "manifest.json").string(), out, seed);
        write_config_echo(cfg, out_dir);
        return;
    }

    const TrainTest data = realize_dataset(cfg.dataset, seed);
    save_csv((fs::path(out_dir) / "dataset.csv").string(), data.train);
    save_csv((fs::path(out_dir) / "test.csv").string(), data.test);
    save_manifest((fs::path(out_dir) / "manifest.json").string(), data.train, seed);
    write_config_echo(cfg, out_dir);
}

void cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    const TrainTest data = realize_dataset(cfg.dataset, cfg.trainer.seed);
    std::unique_ptr<Backbone> model =
        make_backbone(cfg.backbone, data.train.dim(), experiment_model_seed(cfg.trainer.seed));
    if (model->degenerate_config()) {
        std::cerr << "warning: degenerate backbone configuration (single contrastive view)\n";
    }

    const std::string history_path = (fs::path(out_dir) / "history.csv").string();
    TrainingHistory partial;
    try {
        const TrainingHistory history =
            train(*model, data.train, cfg.trainer,
                  [&](int, const EpochStats& stats) { partial.epochs.push_back(stats); });
        save_history_csv(history_path, history);
    } catch (const DivergenceError&) {
        save_history_csv(history_path, partial);  // keep completed epochs
        write_config_echo(cfg, out_dir);
        throw;
    }

    save_checkpoint((fs::path(out_dir) / "checkpoint.json").string(), *model);
    write_config_echo(cfg, out_dir);

    double total_seconds = 0.0;
    for (const EpochStats& e : partial.epochs) total_seconds += e.seconds;
    std::cerr << "trained " << strategy_name(cfg.trainer.strategy) << " for "
              << partial.epochs.size() << " epochs in " << total_seconds << "s\n";
}

void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
              const std::string& out_dir) {
    ensure_dir(out_dir);
    std::unique_ptr<Backbone> model = load_checkpoint(checkpoint_path);
    if (model->kind() != cfg.backbone.kind) {
        throw DataError("eval: checkpoint is '" + model->kind() + "' but config expects '" +
                        cfg.backbone.kind + "'");
    }
    const TrainTest data = realize_dataset(cfg.dataset, cfg.trainer.seed);
    if (model->input_dim() != data.test.dim()) {
        throw DataError("eval: checkpoint expects " + std::to_string(model->input_dim()) +
                        " features, test data has " + std::to_string(data.test.dim()));
    }

    const std::vector<double> scores = test_scores(*model, data.test.features);
    {
        std::ofstream out((fs::path(out_dir) / "scores.csv").string(), std::ios::binary);
        if (!out) throw DataError("cannot write scores.csv");
        out << (data.test.has_labels() ? "index,score,label\n" : "index,score\n");
        for (std::size_t i = 0; i < scores.size(); ++i) {
            out << i << ',' << format_double(scores[i]);
            if (data.test.has_labels()) out << ',' << data.test.labels[i];
            out << '\n';
        }
    }
    write_config_echo(cfg, out_dir);

    if (!data.test.has_labels()) {
        throw MetricError("eval: test data has no labels; AUC/F1 undefined (scores.csv written)");
    }
    MetricReport report;
    SeedResult r;
    r.seed = cfg.trainer.seed;
    r.auc = auc(scores, data.test.labels);
    r.f1 = f1_top_k(scores, data.test.labels);
    r.f1_threshold = top_k_threshold(scores, data.test.anomaly_count());
    report.seeds.push_back(r);
    report.n_test = data.test.size();
    report.aggregate();
    write_text_file((fs::path(out_dir) / "report.json").string(),
                    report_to_json(report).dump(2) + "\n");
    {
        std::ofstream out((fs::path(out_dir) / "report.csv").string(), std::ios::binary);
        if (!out) throw DataError("cannot write report.csv");
        out << "seed,auc,f1,f1_threshold,failed\n";
        write_report_csv(out, report, "");
    }
}

void cmd_contour(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                 const std::string& out_dir) {
    ensure_dir(out_dir);
    std::unique_ptr<Backbone> model = load_checkpoint(checkpoint_path);
    if (model->input_dim() != 2) {
        throw DataError("contour: needs a 2D model, checkpoint has input_dim = " +
                        std::to_string(model->input_dim()));
    }
    const TrainTest data = realize_dataset(cfg.dataset, cfg.trainer.seed);
    if (data.train.dim() != 2) throw DataError("contour: needs 2D data");

    const std::vector<double> train_scores = test_scores(*model, data.train.features);
    const double level = quantile_midpoint(train_scores, cfg.contour.quantile);

    const ContourSpec& c = cfg.contour;
    const std::size_t res = c.resolution;
    {
        std::ofstream out((fs::path(out_dir) / "contour.csv").string(), std::ios::binary);
        if (!out) throw DataError("cannot write contour.csv");
        out << "x,y,score\n";
        Matrix point(1, 2);
        for (std::size_t yi = 0; yi < res; ++yi) {
            const double y = res == 1 ? c.y_min
                                      : c.y_min + (c.y_max - c.y_min) * static_cast<double>(yi) /
                                                      static_cast<double>(res - 1);
            for (std::size_t xi = 0; xi < res; ++xi) {
                const double x = res == 1 ? c.x_min
                                          : c.x_min + (c.x_max - c.x_min) * static_cast<double>(xi) /
                                                          static_cast<double>(res - 1);
                point.at(0, 0) = x;
                point.at(0, 1) = y;
                const double score = test_scores(*model, point)[0];
                out << format_double(x) << ',' << format_double(y) << ','
                    << format_double(score) << '\n';
            }
        }
    }
    json meta;
    meta["level"] = level;
    meta["quantile"] = c.quantile;
    meta["x_min"] = c.x_min;
    meta["x_max"] = c.x_max;
    meta["y_min"] = c.y_min;
    meta["y_max"] = c.y_max;
    meta["resolution"] = res;
    write_text_file((fs::path(out_dir) / "contour.json").string(), meta.dump(2) + "\n");
    write_config_echo(cfg, out_dir);
}

void cmd_grid(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t workers) {
    ensure_dir(out_dir);
    const std::size_t n_rows = cfg.grid.alpha0_axis.size();
    const std::size_t n_cols = cfg.grid.alpha_axis.size();
    const std::size_t n_cells = n_rows * n_cols;
    ensure_dir((fs::path(out_dir) / "cells").string());

    struct CellOutcome {
        bool failed = false;
        double auc_mean = std::nan("");
    };
    std::vector<CellOutcome> outcomes(n_cells);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> any_failed{false};

    auto run_cell = [&](std::size_t idx) {
        const std::size_t r = idx / n_cols;
        const std::size_t c = idx % n_cols;
        const fs::path cell_dir =
            fs::path(out_dir) / "cells" / ("a0_" + std::to_string(r) + "_a_" + std::to_string(c));
        const fs::path report_path = cell_dir / "report.json";

        // Resume: a parseable report means the cell is done.
        if (fs::exists(report_path)) {
            try {
                const json j = json::parse(read_text_file(report_path.string()));
                if (j.contains("error")) {
                    outcomes[idx].failed = true;
                    any_failed = true;
                } else {
                    outcomes[idx].auc_mean = j.at("auc_mean").get<double>();
                }
                return;
            } catch (const std::exception&) {
                // fall through and recompute
            }
        }

        std::error_code ec;
        fs::create_directories(cell_dir, ec);
        try {
            DatasetSpec ds = cfg.dataset;
            ds.alpha0 = cfg.grid.alpha0_axis[r];
            TrainerConfig tc = cfg.trainer;
            tc.alpha = cfg.grid.alpha_axis[c];
            const std::vector<std::uint64_t> seeds =
                grid_cell_seeds(cfg.grid.master_seed, idx, cfg.grid.n_seeds);
            MetricReport report = run_experiment(ds, cfg.backbone, tc, seeds);
            json j = report_to_json(report);
            j["alpha"] = cfg.grid.alpha_axis[c];
            j["alpha0"] = cfg.grid.alpha0_axis[r];
            write_text_file(report_path.string(), j.dump(2) + "\n");
            outcomes[idx].auc_mean = report.auc_mean;
        } catch (const std::exception& e) {
            json j;
            j["error"] = e.what();
            j["alpha"] = cfg.grid.alpha_axis[c];
            j["alpha0"] = cfg.grid.alpha0_axis[r];
            write_text_file(report_path.string(), j.dump(2) + "\n");
            outcomes[idx].failed = true;
            any_failed = true;
        }
    };

    workers = std::max<std::size_t>(1, std::min(workers, n_cells));
    if (workers == 1) {
        for (std::size_t i = 0; i < n_cells; ++i) run_cell(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1)) {
                    run_cell(i);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    {
        std::ofstream out((fs::path(out_dir) / "grid.csv").string(), std::ios::binary);
        if (!out) throw DataError("cannot write grid.csv");
        out << "alpha0\\alpha";
        for (double a : cfg.grid.alpha_axis) out << ',' << format_double(a);
        out << '\n';
        for (std::size_t r = 0; r < n_rows; ++r) {
            out << format_double(cfg.grid.alpha0_axis[r]);
            for (std::size_t c = 0; c < n_cols; ++c) {
                const CellOutcome& o = outcomes[r * n_cols + c];
                out << ',' << (o.failed ? "nan" : format_double(o.auc_mean));
            }
            out << '\n';
        }
    }
    {
        // Flat companion: one row per seed per cell, assembled from the cell
        // reports so resumed runs are covered too.
        std::ofstream out((fs::path(out_dir) / "cells.csv").string(), std::ios::binary);
        if (!out) throw DataError("cannot write cells.csv");
        out << "alpha0,alpha,seed,auc,f1,f1_threshold,failed\n";
        for (std::size_t r = 0; r < n_rows; ++r) {
            for (std::size_t c = 0; c < n_cols; ++c) {
                const fs::path report_path = fs::path(out_dir) / "cells" /
                                             ("a0_" + std::to_string(r) + "_a_" +
                                              std::to_string(c)) /
                                             "report.json";
                json j;
                try {
                    j = json::parse(read_text_file(report_path.string()));
                } catch (const std::exception&) {
                    continue;
                }
                if (j.contains("error")) continue;
                const std::string prefix = format_double(cfg.grid.alpha0_axis[r]) + "," +
                                           format_double(cfg.grid.alpha_axis[c]) + ",";
                for (const json& s : j.at("seeds")) {
                    out << prefix << s.at("seed").get<std::uint64_t>() << ',';
                    if (s.at("failed").get<bool>()) {
                        out << "nan,nan,nan,1\n";
                    } else {
                        out << format_double(s.at("auc").get<double>()) << ','
                            << format_double(s.at("f1").get<double>()) << ','
                            << format_double(s.at("f1_threshold").get<double>()) << ",0\n";
                    }
                }
            }
        }
    }
    write_config_echo(cfg, out_dir);

    if (any_failed) throw DataError("grid: one or more cells failed (see cells/*/report.json)");
}

}  // namespace loe
