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
#include <cstdio>
#include <limits>
#include <vector>

#include "doctest.h"
#include "loe/errors.hpp"
#include "loe/rng.hpp"

using namespace loe;

namespace {

// ---- plain-double re-implementations used as oracles ----

std::vector<double> naive_linear(const std::vector<double>& w, const std::vector<double>& b,
                                 const std::vector<double>& x, std::size_t rows,
                                 std::size_t cols) {
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = b[r];
        for (std::size_t c = 0; c < cols; ++c) s += w[r * cols + c] * x[c];
        y[r] = s;
    }
    return y;
}

std::vector<double> naive_relu(std::vector<double> v) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
    return v;
}

double naive_cos(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / (std::max(std::sqrt(aa), 1e-12) * std::max(std::sqrt(bb), 1e-12));
}

// Direct evaluation of the NTL view probabilities for a single-layer encoder.
std::vector<double> ntl_oracle_probs(const Backbone& model, const NtlConfig& cfg,
                                     const std::vector<double>& x) {
    const auto& p = model.params();
    std::vector<std::vector<double>> views = {x};
    for (std::size_t k = 0; k < cfg.n_transforms; ++k) {
        const std::string t = "t" + std::to_string(k);
        const auto h = naive_relu(naive_linear(p.values(t + ".l1.w"), p.values(t + ".l1.b"), x,
                                               cfg.hidden_dim, cfg.input_dim));
        views.push_back(naive_linear(p.values(t + ".l2.w"), p.values(t + ".l2.b"), h,
                                     cfg.input_dim, cfg.hidden_dim));
    }
    std::vector<std::vector<double>> embed;
    for (const auto& v : views) {
        embed.push_back(naive_linear(p.values("enc.l1.w"), p.values("enc.l1.b"), v,
                                     cfg.embed_dim, cfg.input_dim));
    }
    std::vector<double> probs(cfg.n_transforms);
    for (std::size_t k = 1; k <= cfg.n_transforms; ++k) {
        const double num = std::exp(naive_cos(embed[k], embed[0]) / cfg.tau);
        double denom = num;
        for (std::size_t l = 1; l <= cfg.n_transforms; ++l) {
            if (l != k) denom += std::exp(naive_cos(embed[k], embed[l]) / cfg.tau);
        }
        probs[k - 1] = num / denom;
    }
    return probs;
}

// Direct evaluation of the ICL window probabilities (single-layer encoders).
std::vector<double> icl_oracle_probs(const Backbone& model, const IclConfig& cfg,
                                     const std::vector<double>& x) {
    const auto& p = model.params();
    const std::size_t K = cfg.input_dim - cfg.window + 1;
    const std::size_t cdim = cfg.input_dim - cfg.window;
    std::vector<std::vector<double>> fa(K), gb(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> win(x.begin() + static_cast<std::ptrdiff_t>(k),
                                x.begin() + static_cast<std::ptrdiff_t>(k + cfg.window));
        std::vector<double> rest;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i < k || i >= k + cfg.window) rest.push_back(x[i]);
        }
        fa[k] = naive_linear(p.values("f.l1.w"), p.values("f.l1.b"), win, cfg.embed_dim,
                             cfg.window);
        gb[k] = naive_linear(p.values("g.l1.w"), p.values("g.l1.b"), rest, cfg.embed_dim, cdim);
    }
    std::vector<double> probs(K);
    for (std::size_t k = 0; k < K; ++k) {
        double denom = 0.0;
        for (std::size_t l = 0; l < K; ++l) denom += std::exp(naive_cos(fa[l], gb[k]) / cfg.tau);
        probs[k] = std::exp(naive_cos(fa[k], gb[k]) / cfg.tau) / denom;
    }
    return probs;
}

void set_param(Backbone& m, const std::string& name, std::vector<double> v) {
    m.params().values(name) = std::move(v);
}

// First-step descent: some small enough plain gradient step on the chosen
// loss must strictly decrease it.
bool gradient_step_decreases(const Backbone& model, const std::vector<double>& x,
                             bool anomaly_loss) {
    Tape tape;
    const std::vector<NodeId> leaves = model.bind_params(tape);
    const DualLossNodes nodes = model.build_dual_loss(tape, leaves, x);
    const NodeId target = anomaly_loss ? nodes.anomaly : nodes.normal;
    const double before = tape.scalar(target);
    tape.backward(target);

    double lr = 1e-2;
    for (int attempt = 0; attempt < 24; ++attempt, lr *= 0.5) {
        std::unique_ptr<Backbone> stepped = model.clone();
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            const auto& g = tape.grad(leaves[i]);
            auto& v = stepped->params()[i].values;
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= lr * g[j];
        }
        const DualLossValues after = stepped->dual_loss(x);
        const double value = anomaly_loss ? after.anomaly : after.normal;
        if (value < before) return true;
    }
    return false;
}

DsvddConfig toy_dsvdd_config() {
    DsvddConfig cfg;
    cfg.centers = Matrix(3, 2);
    cfg.centers.at(0, 0) = 1.0;
    cfg.centers.at(0, 1) = 1.0;
    cfg.centers.at(1, 0) = -0.25;
    cfg.centers.at(1, 1) = 2.5;
    cfg.centers.at(2, 0) = -1.0;
    cfg.centers.at(2, 1) = 0.5;
    return cfg;
}

}  // namespace

TEST_CASE("dsvdd: unit and squared distances, epsilon floor") {
    const DsvddConfig cfg = toy_dsvdd_config();
    auto model = make_dsvdd_rbf(cfg, 1);
    // Zero the RBF contribution so f(x) = out.b everywhere.
    set_param(*model, "out.w", {0.0, 0.0, 0.0});
    set_param(*model, "out.b", {2.0});

    const std::vector<double> x = {0.3, 0.4};

    set_param(*model, "center", {1.0});  // f - c = 1
    DualLossValues d = model->dual_loss(x);
    CHECK(d.normal == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.anomaly == doctest::Approx(1.0).epsilon(1e-5));

    set_param(*model, "center", {2.0});  // f = c
    d = model->dual_loss(x);
    CHECK(d.normal == 0.0);
    CHECK(d.anomaly == doctest::Approx(1.0 / cfg.recip_eps).epsilon(1e-12));

    set_param(*model, "center", {0.0});  // f - c = 2
    d = model->dual_loss(x);
    CHECK(d.normal == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(d.anomaly == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("dsvdd: L_n * L_a product stays in the documented band") {
    auto model = make_toy_dsvdd(3);
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> x = {rng.normal(1.0, 1.5), rng.normal(1.0, 1.5)};
        const DualLossValues d = model->dual_loss(x);
        const double product = d.normal * d.anomaly;
        CHECK(product <= 1.0 + 1e-12);
        if (d.normal >= 1.0) CHECK(product >= 1.0 / (1.0 + 1e-6) - 1e-12);
    }
}

TEST_CASE("ntl: equal pairwise cosines give uniform probabilities at K=2") {
    NtlConfig cfg;
    cfg.input_dim = 3;
    cfg.n_transforms = 2;
    cfg.hidden_dim = 3;
    cfg.embed_dim = 2;
    cfg.tau = 0.1;
    auto model = make_ntl(cfg, 5);
    // Encoder collapses every view to the same vector -> all cosines equal 1.
    set_param(*model, "enc.l1.w", std::vector<double>(cfg.embed_dim * cfg.input_dim, 0.0));
    set_param(*model, "enc.l1.b", {0.7, -0.2});

    Tape tape;
    const auto leaves = model->bind_params(tape);
    const DualLossNodes nodes = model->build_dual_loss(tape, leaves, std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(nodes.view_probs.size() == 2);
    CHECK(nodes.view_probs[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(nodes.view_probs[1] == doctest::Approx(0.5).epsilon(1e-14));
    const double expected = -2.0 * std::log(0.5);
    CHECK(tape.scalar(nodes.normal) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(tape.scalar(nodes.anomaly) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ntl: hand-built opposed views reproduce p_1 = e/(e + 1/e)") {
    NtlConfig cfg;
    cfg.input_dim = 1;
    cfg.n_transforms = 2;
    cfg.hidden_dim = 1;
    cfg.embed_dim = 1;
    cfg.tau = 1.0;
    auto model = make_ntl(cfg, 5);
    // T_1(x) = relu(x), T_2(x) = -relu(x), encoder = identity. At x = 3 the
    // views are +3 and -3: cos(f(x_1), f(x)) = 1, cos(f(x_1), f(x_2)) = -1.
    set_param(*model, "t0.l1.w", {1.0});
    set_param(*model, "t0.l1.b", {0.0});
    set_param(*model, "t0.l2.w", {1.0});
    set_param(*model, "t0.l2.b", {0.0});
    set_param(*model, "t1.l1.w", {1.0});
    set_param(*model, "t1.l1.b", {0.0});
    set_param(*model, "t1.l2.w", {-1.0});
    set_param(*model, "t1.l2.b", {0.0});
    set_param(*model, "enc.l1.w", {1.0});
    set_param(*model, "enc.l1.b", {0.0});

    Tape tape;
    const auto leaves = model->bind_params(tape);
    const DualLossNodes nodes = model->build_dual_loss(tape, leaves, std::vector<double>{3.0});
    const double e = std::exp(1.0);
    const double p1 = e / (e + 1.0 / e);
    CHECK(nodes.view_probs[0] == doctest::Approx(p1).epsilon(1e-12));
    CHECK(nodes.view_probs[0] == doctest::Approx(0.8808).epsilon(1e-4));
    // Its contribution to L_n is -log(p_1); the second view contributes -log(0.5).
    const double ln = tape.scalar(nodes.normal);
    CHECK(ln == doctest::Approx(-std::log(p1) - std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("ntl: probabilities match the direct softmax oracle within 1e-12") {
    NtlConfig cfg;
    cfg.input_dim = 6;
    cfg.n_transforms = 4;
    cfg.hidden_dim = 5;
    cfg.embed_dim = 4;
    cfg.tau = 0.1;
    auto model = make_ntl(cfg, 21);
    Rng rng(22);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(cfg.input_dim);
        for (auto& v : x) v = rng.normal();
        Tape tape;
        const auto leaves = model->bind_params(tape);
        const DualLossNodes nodes = model->build_dual_loss(tape, leaves, x);
        const std::vector<double> oracle = ntl_oracle_probs(*model, cfg, x);
        REQUIRE(nodes.view_probs.size() == oracle.size());
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            CHECK(nodes.view_probs[k] == doctest::Approx(oracle[k]).epsilon(1e-12));
            CHECK(nodes.view_probs[k] > 0.0);
            CHECK(nodes.view_probs[k] < 1.0);
        }
        CHECK(std::isfinite(tape.scalar(nodes.normal)));
        CHECK(std::isfinite(tape.scalar(nodes.anomaly)));
        CHECK(tape.scalar(nodes.normal) > 0.0);
        CHECK(tape.scalar(nodes.anomaly) > 0.0);
    }
}

TEST_CASE("icl: single window is degenerate; p_1 normalizes to one") {
    IclConfig cfg;
    cfg.input_dim = 3;
    cfg.window = 3;  // K = 1
    cfg.embed_dim = 2;
    auto model = make_icl(cfg, 9);
    CHECK(model->degenerate_config());

    Tape tape;
    const auto leaves = model->bind_params(tape);
    const DualLossNodes nodes = model->build_dual_loss(tape, leaves, std::vector<double>{1.0, -2.0, 0.5});
    REQUIRE(nodes.view_probs.size() == 1);
    CHECK(nodes.view_probs[0] == 1.0);
    CHECK(tape.scalar(nodes.normal) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::isfinite(tape.scalar(nodes.anomaly)));

    IclConfig ok;
    ok.input_dim = 6;
    ok.window = 2;
    CHECK_FALSE(make_icl(ok, 1)->degenerate_config());
}

TEST_CASE("icl: symmetric similarities give p = 0.5 at K=2") {
    IclConfig cfg;
    cfg.input_dim = 2;
    cfg.window = 1;  // K = 2
    cfg.embed_dim = 2;
    cfg.tau = 0.1;
    auto model = make_icl(cfg, 4);
    set_param(*model, "f.l1.w", std::vector<double>(2, 0.0));
    set_param(*model, "f.l1.b", {0.3, 0.9});
    set_param(*model, "g.l1.w", std::vector<double>(2, 0.0));
    set_param(*model, "g.l1.b", {-0.4, 0.1});

    Tape tape;
    const auto leaves = model->bind_params(tape);
    const DualLossNodes nodes = model->build_dual_loss(tape, leaves, std::vector<double>{5.0, -3.0});
    REQUIRE(nodes.view_probs.size() == 2);
    CHECK(nodes.view_probs[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(nodes.view_probs[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("icl: probabilities match the direct softmax oracle within 1e-12") {
    IclConfig cfg;
    cfg.input_dim = 5;
    cfg.window = 2;  // K = 4
    cfg.embed_dim = 3;
    cfg.tau = 0.1;
    auto model = make_icl(cfg, 31);
    Rng rng(32);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(cfg.input_dim);
        for (auto& v : x) v = rng.normal();
        Tape tape;
        const auto leaves = model->bind_params(tape);
        const DualLossNodes nodes = model->build_dual_loss(tape, leaves, x);
        const std::vector<double> oracle = icl_oracle_probs(*model, cfg, x);
        REQUIRE(nodes.view_probs.size() == oracle.size());
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            CHECK(nodes.view_probs[k] == doctest::Approx(oracle[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("batch_dual_losses: singleton, permutation, toy batch") {
    auto model = make_toy_dsvdd(7);
    Rng rng(8);
    Matrix batch(5, 2);
    for (auto& v : batch.data) v = rng.normal(1.0, 1.0);

    Matrix single(1, 2);
    single.at(0, 0) = batch.at(2, 0);
    single.at(0, 1) = batch.at(2, 1);
    const auto [ln, la] = model->batch_dual_losses(batch);
    const auto [ln1, la1] = model->batch_dual_losses(single);
    CHECK(ln1[0] == ln[2]);
    CHECK(la1[0] == la[2]);

    // Reversed batch gives reversed outputs.
    Matrix rev(5, 2);
    for (std::size_t r = 0; r < 5; ++r) {
        rev.at(r, 0) = batch.at(4 - r, 0);
        rev.at(r, 1) = batch.at(4 - r, 1);
    }
    const auto [lnr, lar] = model->batch_dual_losses(rev);
    for (std::size_t r = 0; r < 5; ++r) {
        CHECK(lnr[r] == ln[4 - r]);
        CHECK(lar[r] == la[4 - r]);
    }

    // 100-sample toy-scale batch: finite, L_n >= 0 everywhere.
    Matrix big(100, 2);
    for (auto& v : big.data) v = rng.normal(0.5, 1.2);
    const auto [lnb, lab] = model->batch_dual_losses(big);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(std::isfinite(lnb[i]));
        CHECK(std::isfinite(lab[i]));
        CHECK(lnb[i] >= 0.0);
    }
}

TEST_CASE("batch errors carry the sample index") {
    auto model = make_toy_dsvdd(1);
    Matrix batch(3, 2);
    batch.at(1, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        model->batch_dual_losses(batch);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("sample 1") != std::string::npos);
    }
    CHECK_THROWS_AS(model->batch_dual_losses(Matrix(0, 2)), DataError);
    CHECK_THROWS_AS(model->dual_loss(std::vector<double>{1.0}), DataError);  // wrong dim
}

TEST_CASE("first gradient step decreases each loss at random inits") {
    Rng rng(55);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto dsvdd = make_toy_dsvdd(seed);
        const std::vector<double> x2 = {rng.normal(1.0, 1.0), rng.normal(1.0, 1.0)};
        CHECK(gradient_step_decreases(*dsvdd, x2, false));
        CHECK(gradient_step_decreases(*dsvdd, x2, true));

        NtlConfig ncfg;
        ncfg.input_dim = 4;
        ncfg.n_transforms = 3;
        auto ntl = make_ntl(ncfg, seed);
        std::vector<double> x4(4);
        for (auto& v : x4) v = rng.normal();
        CHECK(gradient_step_decreases(*ntl, x4, false));
        CHECK(gradient_step_decreases(*ntl, x4, true));

        IclConfig icfg;
        icfg.input_dim = 4;
        icfg.window = 2;
        auto icl = make_icl(icfg, seed);
        CHECK(gradient_step_decreases(*icl, x4, false));
        CHECK(gradient_step_decreases(*icl, x4, true));
    }
}

TEST_CASE("grad_check passes for all three backbones") {
    Rng rng(66);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        {
            auto model = make_toy_dsvdd(seed);
            const std::vector<double> x = {rng.normal(1.0, 1.0), rng.normal(1.0, 1.0)};
            Tape tape;
            const auto leaves = model->bind_params(tape);
            const DualLossNodes nodes = model->build_dual_loss(tape, leaves, x);
            CHECK(grad_check(tape, nodes.normal, leaves, 1e-5) < 1e-4);
            Tape tape2;
            const auto leaves2 = model->bind_params(tape2);
            const DualLossNodes nodes2 = model->build_dual_loss(tape2, leaves2, x);
            CHECK(grad_check(tape2, nodes2.anomaly, leaves2, 1e-5) < 1e-4);
        }
        {
            NtlConfig cfg;
            cfg.input_dim = 4;
            cfg.n_transforms = 3;
            cfg.hidden_dim = 4;
            cfg.embed_dim = 3;
            auto model = make_ntl(cfg, seed);
            std::vector<double> x(4);
            for (auto& v : x) v = rng.normal();
            Tape tape;
            const auto leaves = model->bind_params(tape);
            const DualLossNodes nodes = model->build_dual_loss(tape, leaves, x);
            CHECK(grad_check(tape, nodes.normal, leaves, 1e-5) < 1e-4);
        }
        {
            IclConfig cfg;
            cfg.input_dim = 5;
            cfg.window = 2;
            cfg.embed_dim = 3;
            auto model = make_icl(cfg, seed);
            std::vector<double> x(5);
            for (auto& v : x) v = rng.normal();
            Tape tape;
            const auto leaves = model->bind_params(tape);
            const DualLossNodes nodes = model->build_dual_loss(tape, leaves, x);
            CHECK(grad_check(tape, nodes.normal, leaves, 1e-5) < 1e-4);
        }
    }
}

TEST_CASE("checkpoint round-trip preserves parameters and behavior") {
    NtlConfig cfg;
    cfg.input_dim = 4;
    cfg.n_transforms = 2;
    auto model = make_ntl(cfg, 77);
    const std::string path = "/tmp/loe_test_checkpoint.json";
    save_checkpoint(path, *model);
    auto loaded = load_checkpoint(path);
    CHECK(loaded->kind() == "ntl");
    CHECK(loaded->input_dim() == 4);
    for (std::size_t i = 0; i < model->params().count(); ++i) {
        CHECK(loaded->params()[i].name == model->params()[i].name);
        CHECK(loaded->params()[i].values == model->params()[i].values);
    }
    const std::vector<double> x = {0.1, -0.4, 2.0, 1.0};
    CHECK(loaded->dual_loss(x).normal == model->dual_loss(x).normal);
    CHECK(loaded->dual_loss(x).anomaly == model->dual_loss(x).anomaly);

    CHECK_THROWS_AS(load_checkpoint("/tmp/loe_missing_checkpoint.json"), DataError);
}
