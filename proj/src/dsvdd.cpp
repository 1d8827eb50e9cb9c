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

#include <memory>

#include "json.hpp"

#include "loe/backbones.hpp"
#include "loe/errors.hpp"
#include "loe/rng.hpp"

namespace loe {

namespace {

/// One-layer Gaussian RBF network projected to a scalar, trained one-class
/// style: L_n is the squared distance of the output from a learnable center,
/// L_a its reciprocal with an additive floor.
///
/// The RBF centers are frozen at construction; the widths are stored as log
/// precisions so the effective width stays positive. The model center and
/// output bias are learnable with random init.
class DsvddRbf final : public Backbone {
public:
    DsvddRbf(DsvddConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
        if (cfg_.centers.rows == 0 || cfg_.centers.cols == 0) {
            throw ConfigError("dsvdd_rbf: needs at least one RBF center");
        }
        if (cfg_.recip_eps <= 0.0) throw ConfigError("dsvdd_rbf: recip_eps must be positive");
        Rng rng = Rng::derive(seed, 0x64737664);  // "dsvd"
        const std::size_t n = cfg_.centers.rows;
        std::vector<double> w(n), log_prec(n, 0.0);
        for (double& v : w) v = rng.normal();
        params_.add("rbf.log_precision", std::move(log_prec));
        params_.add("out.w", std::move(w));
        params_.add("out.b", {rng.normal()});
        params_.add("center", {rng.normal()});
    }

    std::string kind() const override { return "dsvdd_rbf"; }
    std::size_t input_dim() const override { return cfg_.centers.cols; }

    nlohmann::json hyper_json() const override {
        return {{"recip_eps", cfg_.recip_eps},
                {"centers_rows", cfg_.centers.rows},
                {"centers_cols", cfg_.centers.cols},
                {"centers", cfg_.centers.data}};
    }

    std::unique_ptr<Backbone> clone() const override {
        return std::make_unique<DsvddRbf>(*this);
    }

    DualLossNodes build_dual_loss(Tape& tape, std::span<const NodeId> leaves,
                                  std::span<const double> x) const override {
        const NodeId log_prec = leaves[0];
        const NodeId out_w = leaves[1];
        const NodeId out_b = leaves[2];
        const NodeId center = leaves[3];

        const NodeId xin = tape.constant({x.begin(), x.end()});
        const NodeId precision = tape.exp(log_prec);

        // f(x) = sum_j w_j exp(-prec_j ||x - c_j||^2) + b
        NodeId f = out_b;
        for (std::size_t j = 0; j < cfg_.centers.rows; ++j) {
            const auto c = cfg_.centers.row(j);
            const NodeId cj = tape.constant({c.begin(), c.end()});
            const NodeId diff = tape.sub(xin, cj);
            const NodeId d2 = tape.dot(diff, diff);
            const NodeId pj = tape.gather(precision, {static_cast<std::uint32_t>(j)});
            const NodeId phi = tape.exp(tape.scale(tape.mul(d2, pj), -1.0));
            const NodeId wj = tape.gather(out_w, {static_cast<std::uint32_t>(j)});
            f = tape.add(f, tape.mul(wj, phi));
        }

        const NodeId dist = tape.sub(f, center);
        const NodeId ln = tape.mul(dist, dist);
        // Additive recip_eps keeps L_a finite at f(x) = c.
        const NodeId one = tape.constant({1.0});
        const NodeId la = tape.div(one, tape.offset(ln, cfg_.recip_eps));
        return {ln, la, {}};
    }

private:
    DsvddConfig cfg_;
};

}  // namespace

std::unique_ptr<Backbone> make_dsvdd_rbf(const DsvddConfig& cfg, std::uint64_t seed) {
    return std::make_unique<DsvddRbf>(cfg, seed);
}

}  // namespace loe
