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

/// Internal contrastive learning over feature windows. Window k is
/// a_k(x) = x[k .. k+w), its complement b_k(x) the remaining features;
/// consecutive windows with stride 1, so K = D - w + 1. Two encoders f, g
/// embed window and complement and each position is scored by
///   p_k = h(a_k, b_k) / sum_l h(a_l, b_k),  h(a, b) = exp(cos(f(a), g(b)) / tau),
/// with the flipped objective L_a = -sum_k log(1 - p_k) for anomalies.
///
/// The supported regime is input_dim >= 2 * window. Larger windows up to
/// window == input_dim still construct (K == 1 then normalizes every p_k to
/// one); such configs are reported by degenerate_config() and callers warn.
class IclBackbone final : public Backbone {
public:
    IclBackbone(IclConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        if (cfg_.input_dim == 0) throw ConfigError("icl: input_dim must be positive");
        if (cfg_.window == 0) throw ConfigError("icl: window must be positive");
        if (cfg_.window > cfg_.input_dim) {
            throw ConfigError("icl: window " + std::to_string(cfg_.window) +
                              " exceeds input_dim " + std::to_string(cfg_.input_dim));
        }
        if (cfg_.encoder_layers < 1 || cfg_.encoder_layers > 2) {
            throw ConfigError("icl: encoder_layers must be 1 or 2");
        }
        if (cfg_.tau <= 0.0) throw ConfigError("icl: tau must be positive");
        if (cfg_.embed_dim == 0) cfg_.embed_dim = 2 * cfg_.window;
        if (cfg_.hidden_dim == 0) cfg_.hidden_dim = cfg_.embed_dim;

        Rng rng = Rng::derive(seed, 0x69636c);  // "icl"
        const std::size_t wdim = cfg_.window;
        const std::size_t cdim = cfg_.input_dim - cfg_.window;
        if (cfg_.encoder_layers == 1) {
            detail::add_linear(params_, "f.l1", cfg_.embed_dim, wdim, rng);
            detail::add_linear(params_, "g.l1", cfg_.embed_dim, cdim, rng);
        } else {
            detail::add_linear(params_, "f.l1", cfg_.hidden_dim, wdim, rng);
            detail::add_linear(params_, "f.l2", cfg_.embed_dim, cfg_.hidden_dim, rng);
            detail::add_linear(params_, "g.l1", cfg_.hidden_dim, cdim, rng);
            detail::add_linear(params_, "g.l2", cfg_.embed_dim, cfg_.hidden_dim, rng);
        }
    }

    std::string kind() const override { return "icl"; }
    std::size_t input_dim() const override { return cfg_.input_dim; }
    std::size_t n_windows() const { return cfg_.input_dim - cfg_.window + 1; }

    bool degenerate_config() const override { return n_windows() == 1; }

    nlohmann::json hyper_json() const override {
        return {{"input_dim", cfg_.input_dim}, {"window", cfg_.window},
                {"embed_dim", cfg_.embed_dim}, {"encoder_layers", cfg_.encoder_layers},
                {"hidden_dim", cfg_.hidden_dim}, {"tau", cfg_.tau}};
    }

    std::unique_ptr<Backbone> clone() const override {
        return std::make_unique<IclBackbone>(*this);
    }

    DualLossNodes build_dual_loss(Tape& tape, std::span<const NodeId> leaves,
                                  std::span<const double> x) const override {
        const std::size_t K = n_windows();
        const std::size_t w = cfg_.window;
        const std::size_t d = cfg_.input_dim;

        const NodeId xin = tape.constant({x.begin(), x.end()});

        std::vector<NodeId> fa(K), gb(K);
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<std::uint32_t> win(w), rest;
            rest.reserve(d - w);
            for (std::size_t i = 0; i < w; ++i) win[i] = static_cast<std::uint32_t>(k + i);
            for (std::size_t i = 0; i < d; ++i) {
                if (i < k || i >= k + w) rest.push_back(static_cast<std::uint32_t>(i));
            }
            fa[k] = encode(tape, leaves, /*use_f=*/true, tape.gather(xin, std::move(win)));
            gb[k] = encode(tape, leaves, /*use_f=*/false, tape.gather(xin, std::move(rest)));
        }

        const double inv_tau = 1.0 / cfg_.tau;
        std::vector<std::vector<NodeId>> sim(K, std::vector<NodeId>(K));
        for (std::size_t l = 0; l < K; ++l) {
            for (std::size_t k = 0; k < K; ++k) {
                sim[l][k] = tape.exp(tape.scale(tape.cos_sim(fa[l], gb[k]), inv_tau));
            }
        }

        std::vector<NodeId> log_p(K), log_1mp(K);
        DualLossNodes out;
        out.view_probs.reserve(K);
        for (std::size_t k = 0; k < K; ++k) {
            NodeId denom = sim[0][k];
            for (std::size_t l = 1; l < K; ++l) denom = tape.add(denom, sim[l][k]);
            const NodeId p = tape.div(sim[k][k], denom);
            log_p[k] = tape.log(p);
            log_1mp[k] = tape.log(tape.offset(tape.scale(p, -1.0), 1.0));
            out.view_probs.push_back(tape.scalar(p));
        }

        const std::vector<double> neg_ones(K, -1.0);
        out.normal = tape.weighted_sum(log_p, neg_ones);
        out.anomaly = tape.weighted_sum(log_1mp, neg_ones);
        return out;
    }

private:
    NodeId encode(Tape& tape, std::span<const NodeId> leaves, bool use_f, NodeId v) const {
        const std::size_t in_dim = use_f ? cfg_.window : cfg_.input_dim - cfg_.window;
        const std::size_t per_encoder = cfg_.encoder_layers * 2;
        const std::size_t base = use_f ? 0 : per_encoder;
        if (cfg_.encoder_layers == 1) {
            const detail::LinearLeaves l1{leaves[base], leaves[base + 1]};
            return detail::apply_linear(tape, l1, v, cfg_.embed_dim, in_dim);
        }
        const detail::LinearLeaves l1{leaves[base], leaves[base + 1]};
        const detail::LinearLeaves l2{leaves[base + 2], leaves[base + 3]};
        const NodeId hidden = tape.relu(detail::apply_linear(tape, l1, v, cfg_.hidden_dim, in_dim));
        return detail::apply_linear(tape, l2, hidden, cfg_.embed_dim, cfg_.hidden_dim);
    }

    IclConfig cfg_;
};

}  // namespace

std::unique_ptr<Backbone> make_icl(const IclConfig& cfg, std::uint64_t seed) {
    return std::make_unique<IclBackbone>(cfg, seed);
}

}  // namespace loe
