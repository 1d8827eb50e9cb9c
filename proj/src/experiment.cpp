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

#include "loe/experiment.hpp"

#include <cmath>

#include "loe/errors.hpp"

namespace loe {

namespace {

// Stream tags for the independent RNG substreams of one experiment seed.
enum SeedStream : std::uint64_t {
    kTrainData = 1,
    kTestData = 2,
    kContamination = 3,
    kSplit = 4,
    kModelInit = 6,
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t state = seed;
    (void)splitmix64(state);
    state ^= salt;
    return splitmix64(state);
}

Matrix label_rows(const Dataset& ds, int label) {
    std::size_t count = 0;
    for (int l : ds.labels) {
        if (l == label) ++count;
    }
    Matrix out(count, ds.dim());
    std::size_t r = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == label) {
            const auto src = ds.features.row(i);
            std::copy(src.begin(), src.end(),
                      out.data.begin() + static_cast<std::ptrdiff_t>(r * ds.dim()));
            ++r;
        }
    }
    return out;
}

TrainTest realize_toy(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.alpha0 < 0.0 || spec.alpha0 >= 1.0) {
        throw ConfigError("toy dataset: alpha0 must be in [0, 1)");
    }
    const std::size_t total = 100;
    const std::size_t k = static_cast<std::size_t>(std::llround(spec.alpha0 * total));
    const GaussianMixtureSpec mixture = toy_mixture_spec();

    auto draw = [&](std::uint64_t stream) {
        Rng rng(mix(seed, stream));
        Dataset ds = sample_mixture(mixture, total - k, k, rng);
        ds.provenance = "toy";
        ds.alpha0 = spec.alpha0;
        return ds;
    };
    return {draw(kTrainData), draw(kTestData)};
}

TrainTest realize_synthetic(const DatasetSpec& spec, std::uint64_t seed) {
    const GaussianMixtureSpec mixture =
        two_cluster_tabular_spec(spec.dims, spec.separation, spec.anomaly_variance);

    Rng test_rng(mix(seed, kTestData));
    Dataset test = sample_mixture(mixture, spec.n_test_normals, spec.n_test_anomalies, test_rng);
    test.provenance = "synthetic-tabular";

    Rng train_rng(mix(seed, kTrainData));
    const Dataset clean = sample_mixture(mixture, spec.n_train_normals, 0, train_rng);
    const Matrix pool = label_rows(test, 1);
    Dataset train = contaminate(clean.features, pool, spec.alpha0, mix(seed, kContamination));
    train.provenance = "synthetic-tabular";
    return {std::move(train), std::move(test)};
}

TrainTest realize_csv(const DatasetSpec& spec, std::uint64_t seed) {
    const Dataset full = load_csv(spec.path, spec.label_column);
    if (!full.has_labels() && spec.contaminate_train) {
        throw DataError("csv dataset: contamination needs a label column");
    }
    auto [train, test] = split(full, spec.test_fraction, mix(seed, kSplit));
    if (spec.contaminate_train) {
        const Matrix train_normals = label_rows(train, 0);
        const Matrix pool = label_rows(test, 1);
        if (pool.rows == 0) throw DataError("csv dataset: no anomalies in the test half");
        train = contaminate(train_normals, pool, spec.alpha0, mix(seed, kContamination));
    }
    return {std::move(train), std::move(test)};
}

}  // namespace

std::uint64_t experiment_model_seed(std::uint64_t run_seed) {
    return mix(run_seed, kModelInit);
}

TrainTest realize_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.kind == "toy") return realize_toy(spec, seed);
    if (spec.kind == "synthetic-tabular") return realize_synthetic(spec, seed);
    if (spec.kind == "csv") return realize_csv(spec, seed);
    throw ConfigError("unknown dataset kind '" + spec.kind +
                      "' (expected toy|synthetic-tabular|csv)");
}

std::unique_ptr<Backbone> make_backbone(const BackboneSpec& spec, std::size_t input_dim,
                                        std::uint64_t seed) {
    if (spec.kind == "dsvdd_rbf") {
        if (input_dim != 2) {
            throw ConfigError("dsvdd_rbf: this backbone is the 2D toy model (input_dim = 2)");
        }
        DsvddConfig cfg;
        const GaussianMixtureSpec mixture = toy_mixture_spec();
        cfg.centers = Matrix(mixture.components.size(), 2);
        for (std::size_t i = 0; i < mixture.components.size(); ++i) {
            cfg.centers.at(i, 0) = mixture.components[i].mean[0];
            cfg.centers.at(i, 1) = mixture.components[i].mean[1];
        }
        cfg.recip_eps = spec.recip_eps;
        return make_dsvdd_rbf(cfg, seed);
    }
    if (spec.kind == "ntl") {
        NtlConfig cfg;
        cfg.input_dim = input_dim;
        cfg.n_transforms = spec.n_transforms;
        cfg.hidden_dim = spec.hidden_dim;
        cfg.embed_dim = spec.embed_dim;
        cfg.encoder_layers = spec.encoder_layers;
        cfg.tau = spec.tau;
        return make_ntl(cfg, seed);
    }
    if (spec.kind == "icl") {
        IclConfig cfg;
        cfg.input_dim = input_dim;
        cfg.window = spec.window;
        cfg.embed_dim = spec.embed_dim;
        cfg.encoder_layers = spec.encoder_layers;
        cfg.hidden_dim = spec.hidden_dim;
        cfg.tau = spec.tau;
        return make_icl(cfg, seed);
    }
    throw ConfigError("unknown backbone kind '" + spec.kind + "' (expected dsvdd_rbf|ntl|icl)");
}

MetricReport run_experiment(const DatasetSpec& dataset, const BackboneSpec& backbone,
                            const TrainerConfig& trainer, std::span<const std::uint64_t> seeds) {
    if (seeds.empty()) throw ConfigError("run_experiment: empty seed list");

    MetricReport report;
    report.seeds.reserve(seeds.size());
    for (std::uint64_t seed : seeds) {
        SeedResult result;
        result.seed = seed;
        try {
            const TrainTest data = realize_dataset(dataset, seed);
            if (!data.test.has_labels()) {
                throw MetricError("test set has no labels; AUC/F1 undefined");
            }
            std::unique_ptr<Backbone> model =
                make_backbone(backbone, data.train.dim(), experiment_model_seed(seed));
            TrainerConfig cfg = trainer;
            cfg.seed = seed;
            train(*model, data.train, cfg);
            const std::vector<double> scores = test_scores(*model, data.test.features);
            result.auc = auc(scores, data.test.labels);
            result.f1 = f1_top_k(scores, data.test.labels);
            result.f1_threshold = top_k_threshold(scores, data.test.anomaly_count());
            report.n_test = data.test.size();
        } catch (const std::exception& e) {
            result.failed = true;
            result.error = e.what();
        }
        report.seeds.push_back(std::move(result));
    }
    report.aggregate();
    return report;
}

std::vector<std::uint64_t> grid_cell_seeds(std::uint64_t master_seed, std::size_t cell_index,
                                           std::size_t n_seeds) {
    std::vector<std::uint64_t> seeds(n_seeds);
    for (std::size_t i = 0; i < n_seeds; ++i) {
        std::uint64_t state = master_seed;
        (void)splitmix64(state);
        state ^= 0x6772696400000000ULL + cell_index;  // "grid"
        (void)splitmix64(state);
        state ^= i;
        seeds[i] = splitmix64(state);
    }
    return seeds;
}

SensitivityGrid sensitivity_grid(std::span<const double> alphas, std::span<const double> alpha0s,
                                 const DatasetSpec& dataset, const BackboneSpec& backbone,
                                 const TrainerConfig& trainer, std::uint64_t master_seed,
                                 std::size_t n_seeds) {
    if (alphas.empty() || alpha0s.empty()) {
        throw ConfigError("sensitivity_grid: alpha and alpha0 axes must be nonempty");
    }
    SensitivityGrid grid;
    grid.alpha_axis.assign(alphas.begin(), alphas.end());
    grid.alpha0_axis.assign(alpha0s.begin(), alpha0s.end());
    grid.cells.resize(alphas.size() * alpha0s.size());

    for (std::size_t r = 0; r < alpha0s.size(); ++r) {
        for (std::size_t c = 0; c < alphas.size(); ++c) {
            const std::size_t idx = r * alphas.size() + c;
            GridCell& cell = grid.cells[idx];
            try {
                DatasetSpec ds = dataset;
                ds.alpha0 = alpha0s[r];
                TrainerConfig cfg = trainer;
                cfg.alpha = alphas[c];
                const std::vector<std::uint64_t> seeds =
                    grid_cell_seeds(master_seed, idx, n_seeds);
                cell.report = run_experiment(ds, backbone, cfg, seeds);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
        }
    }
    return grid;
}

}  // namespace loe
