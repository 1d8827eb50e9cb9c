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

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "loe/autodiff.hpp"
#include "loe/dataset.hpp"
#include "loe/params.hpp"

namespace loe {

/// Per-sample loss pair on a tape. `view_probs` carries the per-view
/// probabilities p_k for contrastive backbones (empty for DSVDD); values are
/// clamped into [1e-12, 1 - 1e-12] before the losses take their logs.
struct DualLossNodes {
    NodeId normal;
    NodeId anomaly;
    std::vector<double> view_probs;
};

struct DualLossValues {
    double normal;
    double anomaly;
};

/// An anomaly-detection model exposing a per-sample loss pair (L_n, L_a)
/// over shared parameters: minimizing L_n fits a sample as normal,
/// minimizing L_a repels it as an anomaly.
class Backbone {
public:
    virtual ~Backbone() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual nlohmann::json hyper_json() const = 0;
    virtual std::unique_ptr<Backbone> clone() const = 0;

    /// True for configurations that are syntactically valid but analytically
    /// trivial (e.g. a single contrastive view); callers should warn.
    virtual bool degenerate_config() const { return false; }

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    /// One leaf per parameter vector, in store order.
    std::vector<NodeId> bind_params(Tape& tape) const;

    /// Appends the loss pair for one sample to `tape`. `param_leaves` must
    /// come from bind_params on the same tape.
    virtual DualLossNodes build_dual_loss(Tape& tape, std::span<const NodeId> param_leaves,
                                          std::span<const double> x) const = 0;

    /// Single-sample convenience: fresh tape, values only.
    DualLossValues dual_loss(std::span<const double> x) const;

    /// Elementwise dual losses over a batch, order-preserving. Per-sample
    /// failures are rethrown with the sample index attached.
    std::pair<std::vector<double>, std::vector<double>> batch_dual_losses(const Matrix& batch) const;

protected:
    Backbone() = default;
    Backbone(const Backbone&) = default;
    Backbone& operator=(const Backbone&) = default;

    void check_input(std::span<const double> x) const;

    ParamStore params_;
};

struct DsvddConfig {
    Matrix centers;          // fixed RBF centers, one per row
    double recip_eps = 1e-6; // additive floor in L_a = 1 / (L_n + recip_eps)
};

struct NtlConfig {
    std::size_t input_dim = 0;
    std::size_t n_transforms = 4;    // K >= 2
    std::size_t hidden_dim = 0;      // 0 -> input_dim
    std::size_t embed_dim = 0;       // 0 -> input_dim
    std::size_t encoder_layers = 1;  // 1 or 2
    double tau = 0.1;
};

struct IclConfig {
    std::size_t input_dim = 0;
    std::size_t window = 1;          // K = input_dim - window + 1
    std::size_t embed_dim = 0;       // 0 -> 2 * window
    std::size_t encoder_layers = 1;  // 1 or 2
    std::size_t hidden_dim = 0;      // 0 -> embed dim
    double tau = 0.1;
};

std::unique_ptr<Backbone> make_dsvdd_rbf(const DsvddConfig& cfg, std::uint64_t seed);
std::unique_ptr<Backbone> make_ntl(const NtlConfig& cfg, std::uint64_t seed);
std::unique_ptr<Backbone> make_icl(const IclConfig& cfg, std::uint64_t seed);

/// DSVDD-RBF with centers fixed at the toy mixture's component means.
std::unique_ptr<Backbone> make_toy_dsvdd(std::uint64_t seed);

/// Versioned JSON checkpoint: flat list of named parameter vectors plus the
/// hyperparameters needed to rebuild the architecture.
void save_checkpoint(const std::string& path, const Backbone& model);
std::unique_ptr<Backbone> load_checkpoint(const std::string& path);

}  // namespace loe
