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

#include "loe/backbones.hpp"

#include <cmath>

#include "json.hpp"

#include "loe/errors.hpp"
#include "loe/io_util.hpp"

namespace loe {

std::vector<NodeId> Backbone::bind_params(Tape& tape) const {
    std::vector<NodeId> leaves;
    leaves.reserve(params_.count());
    for (const Param& p : params_) leaves.push_back(tape.leaf(p.values));
    return leaves;
}

void Backbone::check_input(std::span<const double> x) const {
    if (x.size() != input_dim()) {
        throw DataError(kind() + ": input has " + std::to_string(x.size()) +
                        " features, model expects " + std::to_string(input_dim()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw DataError(kind() + ": non-finite input feature");
    }
}

DualLossValues Backbone::dual_loss(std::span<const double> x) const {
    check_input(x);
    Tape tape;
    const std::vector<NodeId> leaves = bind_params(tape);
    const DualLossNodes nodes = build_dual_loss(tape, leaves, x);
    return {tape.scalar(nodes.normal), tape.scalar(nodes.anomaly)};
}

std::pair<std::vector<double>, std::vector<double>> Backbone::batch_dual_losses(
    const Matrix& batch) const {
    if (batch.rows == 0) throw DataError(kind() + ": empty batch");
    Tape tape;
    const std::vector<NodeId> leaves = bind_params(tape);
    std::vector<double> ln(batch.rows), la(batch.rows);
    for (std::size_t i = 0; i < batch.rows; ++i) {
        try {
            check_input(batch.row(i));
            const DualLossNodes nodes = build_dual_loss(tape, leaves, batch.row(i));
            ln[i] = tape.scalar(nodes.normal);
            la[i] = tape.scalar(nodes.anomaly);
        } catch (const std::exception& e) {
            throw DataError("sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return {std::move(ln), std::move(la)};
}

std::unique_ptr<Backbone> make_toy_dsvdd(std::uint64_t seed) {
    DsvddConfig cfg;
    const GaussianMixtureSpec spec = toy_mixture_spec();
    cfg.centers = Matrix(spec.components.size(), 2);
    for (std::size_t i = 0; i < spec.components.size(); ++i) {
        cfg.centers.at(i, 0) = spec.components[i].mean[0];
        cfg.centers.at(i, 1) = spec.components[i].mean[1];
    }
    return make_dsvdd_rbf(cfg, seed);
}

namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const Backbone& model) {
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    j["kind"] = model.kind();
    j["input_dim"] = model.input_dim();
    j["hyper"] = model.hyper_json();
    nlohmann::json params = nlohmann::json::array();
    for (const Param& p : model.params()) {
        params.push_back({{"name", p.name}, {"values", p.values}});
    }
    j["params"] = std::move(params);
    write_text_file(path, j.dump(2) + "\n");
}

std::unique_ptr<Backbone> load_checkpoint(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid checkpoint JSON: " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != kCheckpointVersion) {
        throw DataError(path + ": unsupported checkpoint format version");
    }
    const std::string kind = j.at("kind").get<std::string>();
    const nlohmann::json& hyper = j.at("hyper");

    std::unique_ptr<Backbone> model;
    if (kind == "dsvdd_rbf") {
        DsvddConfig cfg;
        cfg.recip_eps = hyper.at("recip_eps").get<double>();
        cfg.centers.rows = hyper.at("centers_rows").get<std::size_t>();
        cfg.centers.cols = hyper.at("centers_cols").get<std::size_t>();
        cfg.centers.data = hyper.at("centers").get<std::vector<double>>();
        if (cfg.centers.data.size() != cfg.centers.rows * cfg.centers.cols) {
            throw DataError(path + ": centers shape mismatch");
        }
        model = make_dsvdd_rbf(cfg, 0);
    } else if (kind == "ntl") {
        NtlConfig cfg;
        cfg.input_dim = hyper.at("input_dim").get<std::size_t>();
        cfg.n_transforms = hyper.at("n_transforms").get<std::size_t>();
        cfg.hidden_dim = hyper.at("hidden_dim").get<std::size_t>();
        cfg.embed_dim = hyper.at("embed_dim").get<std::size_t>();
        cfg.encoder_layers = hyper.at("encoder_layers").get<std::size_t>();
        cfg.tau = hyper.at("tau").get<double>();
        model = make_ntl(cfg, 0);
    } else if (kind == "icl") {
        IclConfig cfg;
        cfg.input_dim = hyper.at("input_dim").get<std::size_t>();
        cfg.window = hyper.at("window").get<std::size_t>();
        cfg.embed_dim = hyper.at("embed_dim").get<std::size_t>();
        cfg.encoder_layers = hyper.at("encoder_layers").get<std::size_t>();
        cfg.hidden_dim = hyper.at("hidden_dim").get<std::size_t>();
        cfg.tau = hyper.at("tau").get<double>();
        model = make_icl(cfg, 0);
    } else {
        throw DataError(path + ": unknown backbone kind '" + kind + "'");
    }

    const nlohmann::json& params = j.at("params");
    if (params.size() != model->params().count()) {
        throw DataError(path + ": checkpoint has " + std::to_string(params.size()) +
                        " parameter vectors, model expects " +
                        std::to_string(model->params().count()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string name = params[i].at("name").get<std::string>();
        auto values = params[i].at("values").get<std::vector<double>>();
        Param& target = model->params()[i];
        if (name != target.name) {
            throw DataError(path + ": parameter " + std::to_string(i) + " is '" + name +
                            "', expected '" + target.name + "'");
        }
        if (values.size() != target.values.size()) {
            throw DataError(path + ": parameter '" + name + "' has " +
                            std::to_string(values.size()) + " values, expected " +
                            std::to_string(target.values.size()));
        }
        target.values = std::move(values);
    }
    return model;
}

}  // namespace loe
