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

#include "loe/config.hpp"

#include <set>

#include "loe/errors.hpp"
#include "loe/io_util.hpp"

namespace loe {

namespace {

using nlohmann::json;

/// Strict section reader: every key must be consumed through one of the
/// get_* calls; leftovers are reported as unknown.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                out = it->get<T>();
            } catch (const json::exception&) {
                throw ConfigError("config: bad value for " + name_ + "." + key);
            }
        }
        seen_.insert(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) {
                throw ConfigError("config: unknown key '" + name_ + "." + key + "'");
            }
        }
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    ExperimentConfig cfg;

    static const std::set<std::string> kTopKeys = {
        "schema_version", "dataset", "backbone", "trainer", "eval", "grid", "contour", "output"};
    for (const auto& [key, value] : j.items()) {
        if (!kTopKeys.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    if (j.contains("schema_version")) {
        try {
            cfg.schema_version = j["schema_version"].get<int>();
        } catch (const json::exception&) {
            throw ConfigError("config: bad value for schema_version");
        }
    }
    if (cfg.schema_version != 1) {
        throw ConfigError("config: unsupported schema_version " +
                          std::to_string(cfg.schema_version));
    }

    if (j.contains("dataset")) {
        Section s(j["dataset"], "dataset");
        s.get("kind", cfg.dataset.kind);
        s.get("alpha0", cfg.dataset.alpha0);
        s.get("dims", cfg.dataset.dims);
        s.get("n_train_normals", cfg.dataset.n_train_normals);
        s.get("n_test_normals", cfg.dataset.n_test_normals);
        s.get("n_test_anomalies", cfg.dataset.n_test_anomalies);
        s.get("separation", cfg.dataset.separation);
        s.get("anomaly_variance", cfg.dataset.anomaly_variance);
        s.get("path", cfg.dataset.path);
        std::string label_column;
        s.get("label_column", label_column);
        if (!label_column.empty()) cfg.dataset.label_column = label_column;
        s.get("test_fraction", cfg.dataset.test_fraction);
        s.get("contaminate_train", cfg.dataset.contaminate_train);
        s.finish();
    }

    if (j.contains("backbone")) {
        Section s(j["backbone"], "backbone");
        s.get("kind", cfg.backbone.kind);
        s.get("recip_eps", cfg.backbone.recip_eps);
        s.get("n_transforms", cfg.backbone.n_transforms);
        s.get("hidden_dim", cfg.backbone.hidden_dim);
        s.get("embed_dim", cfg.backbone.embed_dim);
        s.get("encoder_layers", cfg.backbone.encoder_layers);
        s.get("window", cfg.backbone.window);
        s.get("tau", cfg.backbone.tau);
        s.finish();
    }

    if (j.contains("trainer")) {
        Section s(j["trainer"], "trainer");
        std::string strategy = strategy_name(cfg.trainer.strategy);
        s.get("strategy", strategy);
        cfg.trainer.strategy = strategy_from_name(strategy);
        s.get("alpha", cfg.trainer.alpha);
        s.get("epochs", cfg.trainer.epochs);
        s.get("warmup_epochs", cfg.trainer.warmup_epochs);
        s.get("batch_size", cfg.trainer.batch_size);
        s.get("lr", cfg.trainer.adam.lr);
        s.get("beta1", cfg.trainer.adam.beta1);
        s.get("beta2", cfg.trainer.adam.beta2);
        s.get("eps", cfg.trainer.adam.eps);
        s.get("seed", cfg.trainer.seed);
        s.finish();
    }

    if (j.contains("eval")) {
        Section s(j["eval"], "eval");
        s.get("seeds", cfg.eval_seeds);
        s.finish();
        if (cfg.eval_seeds.empty()) throw ConfigError("config: eval.seeds must be nonempty");
    }

    if (j.contains("grid")) {
        Section s(j["grid"], "grid");
        s.get("alpha_axis", cfg.grid.alpha_axis);
        s.get("alpha0_axis", cfg.grid.alpha0_axis);
        s.get("master_seed", cfg.grid.master_seed);
        s.get("n_seeds", cfg.grid.n_seeds);
        s.finish();
        if (cfg.grid.alpha_axis.empty() || cfg.grid.alpha0_axis.empty()) {
            throw ConfigError("config: grid axes must be nonempty");
        }
        if (cfg.grid.n_seeds == 0) throw ConfigError("config: grid.n_seeds must be positive");
    }

    if (j.contains("contour")) {
        Section s(j["contour"], "contour");
        s.get("x_min", cfg.contour.x_min);
        s.get("x_max", cfg.contour.x_max);
        s.get("y_min", cfg.contour.y_min);
        s.get("y_max", cfg.contour.y_max);
        s.get("resolution", cfg.contour.resolution);
        s.get("quantile", cfg.contour.quantile);
        s.finish();
        if (cfg.contour.resolution < 1) throw ConfigError("config: contour.resolution must be >= 1");
        if (cfg.contour.quantile <= 0.0 || cfg.contour.quantile >= 1.0) {
            throw ConfigError("config: contour.quantile must be in (0, 1)");
        }
    }

    if (j.contains("output")) {
        Section s(j["output"], "output");
        s.get("dir", cfg.output_dir);
        s.finish();
    }

    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    json& d = j["dataset"];
    d["kind"] = cfg.dataset.kind;
    d["alpha0"] = cfg.dataset.alpha0;
    d["dims"] = cfg.dataset.dims;
    d["n_train_normals"] = cfg.dataset.n_train_normals;
    d["n_test_normals"] = cfg.dataset.n_test_normals;
    d["n_test_anomalies"] = cfg.dataset.n_test_anomalies;
    d["separation"] = cfg.dataset.separation;
    d["anomaly_variance"] = cfg.dataset.anomaly_variance;
    d["path"] = cfg.dataset.path;
    d["label_column"] = cfg.dataset.label_column.value_or("");
    d["test_fraction"] = cfg.dataset.test_fraction;
    d["contaminate_train"] = cfg.dataset.contaminate_train;
    json& b = j["backbone"];
    b["kind"] = cfg.backbone.kind;
    b["recip_eps"] = cfg.backbone.recip_eps;
    b["n_transforms"] = cfg.backbone.n_transforms;
    b["hidden_dim"] = cfg.backbone.hidden_dim;
    b["embed_dim"] = cfg.backbone.embed_dim;
    b["encoder_layers"] = cfg.backbone.encoder_layers;
    b["window"] = cfg.backbone.window;
    b["tau"] = cfg.backbone.tau;
    json& t = j["trainer"];
    t["strategy"] = strategy_name(cfg.trainer.strategy);
    t["alpha"] = cfg.trainer.alpha;
    t["epochs"] = cfg.trainer.epochs;
    t["warmup_epochs"] = cfg.trainer.warmup_epochs;
    t["batch_size"] = cfg.trainer.batch_size;
    t["lr"] = cfg.trainer.adam.lr;
    t["beta1"] = cfg.trainer.adam.beta1;
    t["beta2"] = cfg.trainer.adam.beta2;
    t["eps"] = cfg.trainer.adam.eps;
    t["seed"] = cfg.trainer.seed;
    j["eval"]["seeds"] = cfg.eval_seeds;
    json& g = j["grid"];
    g["alpha_axis"] = cfg.grid.alpha_axis;
    g["alpha0_axis"] = cfg.grid.alpha0_axis;
    g["master_seed"] = cfg.grid.master_seed;
    g["n_seeds"] = cfg.grid.n_seeds;
    json& c = j["contour"];
    c["x_min"] = cfg.contour.x_min;
    c["x_max"] = cfg.contour.x_max;
    c["y_min"] = cfg.contour.y_min;
    c["y_max"] = cfg.contour.y_max;
    c["resolution"] = cfg.contour.resolution;
    c["quantile"] = cfg.contour.quantile;
    j["output"]["dir"] = cfg.output_dir;
    return j;
}

}  // namespace loe
