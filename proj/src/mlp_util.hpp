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

// Internal helpers shared by the MLP-based backbones. Not installed.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "loe/autodiff.hpp"
#include "loe/params.hpp"
#include "loe/rng.hpp"

namespace loe::detail {

inline std::vector<double> init_weights(std::size_t rows, std::size_t cols, Rng& rng) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> w(rows * cols);
    for (double& v : w) v = rng.normal(0.0, sd);
    return w;
}

// Biases are drawn at the weight scale rather than zeroed: with zero biases
// an input that silences every relu unit collapses a view to the exact zero
// vector, whose cosine similarity sits on the norm floor with a useless
// gradient.
inline void add_linear(ParamStore& params, const std::string& prefix, std::size_t rows,
                       std::size_t cols, Rng& rng) {
    params.add(prefix + ".w", init_weights(rows, cols, rng));
    const double sd = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(cols, 1)));
    std::vector<double> b(rows);
    for (double& v : b) v = rng.normal(0.0, sd);
    params.add(prefix + ".b", std::move(b));
}

/// Indices of a parameter pair laid out by add_linear, resolved by position:
/// the caller tracks a running cursor over the store.
struct LinearLeaves {
    NodeId w;
    NodeId b;
};

/// y = W x + b, shapes taken from the bound leaves.
inline NodeId apply_linear(Tape& tape, LinearLeaves lin, NodeId x, std::size_t rows,
                           std::size_t cols) {
    return tape.affine(lin.w, lin.b, x, rows, cols);
}

}  // namespace loe::detail
