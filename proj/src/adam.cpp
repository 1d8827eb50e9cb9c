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

#include "loe/adam.hpp"

#include <cmath>
#include <string>

#include "loe/errors.hpp"

namespace loe {

Adam::Adam(AdamConfig cfg, const ParamStore& params) : cfg_(cfg) {
    if (cfg_.lr <= 0.0) throw ConfigError("adam: lr must be positive");
    if (cfg_.beta1 <= 0.0 || cfg_.beta1 >= 1.0) throw ConfigError("adam: beta1 must be in (0,1)");
    if (cfg_.beta2 <= 0.0 || cfg_.beta2 >= 1.0) throw ConfigError("adam: beta2 must be in (0,1)");
    if (cfg_.eps <= 0.0) throw ConfigError("adam: eps must be positive");
    m_.reserve(params.count());
    v_.reserve(params.count());
    for (const Param& p : params) {
        m_.emplace_back(p.values.size(), 0.0);
        v_.emplace_back(p.values.size(), 0.0);
    }
}

void Adam::step(ParamStore& params, const std::vector<std::vector<double>>& grads) {
    if (grads.size() != m_.size()) {
        throw ConfigError("adam: gradient count " + std::to_string(grads.size()) +
                          " != parameter count " + std::to_string(m_.size()));
    }
    for (std::size_t p = 0; p < grads.size(); ++p) {
        if (grads[p].size() != m_[p].size()) {
            throw ConfigError("adam: gradient shape mismatch for parameter '" + params[p].name + "'");
        }
        for (double g : grads[p]) {
            if (!std::isfinite(g)) {
                throw DivergenceError("adam: non-finite gradient for parameter '" + params[p].name + "'");
            }
        }
    }

    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t p = 0; p < grads.size(); ++p) {
        auto& m = m_[p];
        auto& v = v_[p];
        auto& x = params[p].values;
        const auto& g = grads[p];
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            x[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

}  // namespace loe
