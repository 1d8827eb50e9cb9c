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
#include "mlp_util.hpp"

namespace loe {

namespace {

/// Neural transformation learning. K learned maps produce views x_k of a
/// sample; a shared encoder embeds the views; each view is scored by the
/// normalized similarity
///   p_k = h(x_k, x) / (h(x_k, x) + sum_{l != k} h(x_k, x_l)),
///   h(a, b) = exp(cos(f(a), f(b)) / tau).
/// L_n = -sum_k log p_k pulls views toward the original and apart from each
/// other; L_a = -sum_k log(1 - p_k) flips that objective for anomalies.
class NtlBackbone final : public Backbone {
public:
    NtlBackbone(NtlConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        if (cfg_.input_dim == 0) throw ConfigError("ntl: input_dim must be positive");
        if (cfg_.n_transforms < 2) throw ConfigError("ntl: needs K >= 2 transformations");
        if (cfg_.encoder_layers < 1 || cfg_.encoder_layers > 2) {
            throw ConfigError("ntl: encoder_layers must be 1 or 2");
        }
        if (cfg_.tau <= 0.0) throw ConfigError("ntl: tau must be positive");
        if (cfg_.hidden_dim == 0) cfg_.hidden_dim = cfg_.input_dim;
        if (cfg_.embed_dim == 0) cfg_.embed_dim = cfg_.input_dim;

        Rng rng = Rng::derive(seed, 0x6e746c);  // "ntl"
        const std::size_t d = cfg_.input_dim;
        const std::size_t h = cfg_.hidden_dim;
        for (std::size_t k = 0; k < cfg_.n_transforms; ++k) {
            const std::string p = "t" + std::to_string(k);
            detail::add_linear(params_, p + ".l1", h, d, rng);
            detail::add_linear(params_, p + ".l2", d, h, rng);
        }
        if (cfg_.encoder_layers == 1) {
            detail::add_linear(params_, "enc.l1", cfg_.embed_dim, d, rng);
        } else {
            detail::add_linear(params_, "enc.l1", h, d, rng);
            detail::add_linear(params_, "enc.l2", cfg_.embed_dim, h, rng);
        }
    }

    std::string kind() const override { return "ntl"; }
    std::size_t input_dim() const override { return cfg_.input_dim; }

    nlohmann::json hyper_json() const override {
        return {{"input_dim", cfg_.input_dim},   {"n_transforms", cfg_.n_transforms},
                {"hidden_dim", cfg_.hidden_dim}, {"embed_dim", cfg_.embed_dim},
                {"encoder_layers", cfg_.encoder_layers}, {"tau", cfg_.tau}};
    }

    std::unique_ptr<Backbone> clone() const override {
        return std::make_unique<NtlBackbone>(*this);
    }

    DualLossNodes build_dual_loss(Tape& tape, std::span<const NodeId> leaves,
                                  std::span<const double> x) const override {
        const std::size_t K = cfg_.n_transforms;
        const std::size_t d = cfg_.input_dim;
        const std::size_t h = cfg_.hidden_dim;

        const NodeId xin = tape.constant({x.begin(), x.end()});

        // views[0] is the original; views[k] = T_k(x), a 2-layer relu MLP.
        std::vector<NodeId> views(K + 1);
        views[0] = xin;
        std::size_t cursor = 0;
        for (std::size_t k = 0; k < K; ++k) {
            const detail::LinearLeaves l1{leaves[cursor], leaves[cursor + 1]};
            const detail::LinearLeaves l2{leaves[cursor + 2], leaves[cursor + 3]};
            cursor += 4;
            const NodeId hidden = tape.relu(detail::apply_linear(tape, l1, xin, h, d));
            views[k + 1] = detail::apply_linear(tape, l2, hidden, d, h);
        }

        std::vector<NodeId> embed(K + 1);
        for (std::size_t i = 0; i <= K; ++i) embed[i] = encode(tape, leaves, cursor, views[i]);

        // Similarity scores h(a,b) = exp(cos/tau) between views.
        const double inv_tau = 1.0 / cfg_.tau;
        std::vector<std::vector<NodeId>> sim(K + 1, std::vector<NodeId>(K + 1));
        for (std::size_t i = 1; i <= K; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const NodeId s = tape.exp(tape.scale(tape.cos_sim(embed[i], embed[j]), inv_tau));
                sim[i][j] = s;
                sim[j][i] = s;
            }
        }

        std::vector<NodeId> log_p(K), log_1mp(K);
        DualLossNodes out;
        out.view_probs.reserve(K);
        for (std::size_t k = 1; k <= K; ++k) {
            NodeId denom = sim[k][0];
            for (std::size_t l = 1; l <= K; ++l) {
                if (l != k) denom = tape.add(denom, sim[k][l]);
            }
            const NodeId p = tape.div(sim[k][0], denom);
            // The guarded logs clamp p into [1e-12, 1 - 1e-12].
            log_p[k - 1] = tape.log(p);
            log_1mp[k - 1] = tape.log(tape.offset(tape.scale(p, -1.0), 1.0));
            out.view_probs.push_back(tape.scalar(p));
        }

        const std::vector<double> neg_ones(K, -1.0);
        out.normal = tape.weighted_sum(log_p, neg_ones);
        out.anomaly = tape.weighted_sum(log_1mp, neg_ones);
        return out;
    }

private:
    NodeId encode(Tape& tape, std::span<const NodeId> leaves, std::size_t cursor,
                  NodeId v) const {
        const std::size_t d = cfg_.input_dim;
        const std::size_t h = cfg_.hidden_dim;
        if (cfg_.encoder_layers == 1) {
            const detail::LinearLeaves l1{leaves[cursor], leaves[cursor + 1]};
            return detail::apply_linear(tape, l1, v, cfg_.embed_dim, d);
        }
        const detail::LinearLeaves l1{leaves[cursor], leaves[cursor + 1]};
        const detail::LinearLeaves l2{leaves[cursor + 2], leaves[cursor + 3]};
        const NodeId hidden = tape.relu(detail::apply_linear(tape, l1, v, h, d));
        return detail::apply_linear(tape, l2, hidden, cfg_.embed_dim, h);
    }

    NtlConfig cfg_;
};

}  // namespace

std::unique_ptr<Backbone> make_ntl(const NtlConfig& cfg, std::uint64_t seed) {
    return std::make_unique<NtlBackbone>(cfg, seed);
}

}  // namespace loe
