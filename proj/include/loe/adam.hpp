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

#include <cstdint>
#include <vector>

#include "loe/params.hpp"

namespace loe {

struct AdamConfig {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with standard bias correction. Moment buffers mirror the parameter
/// store's shapes; step_count() increments by exactly one per step().
class Adam {
public:
    Adam(AdamConfig cfg, const ParamStore& params);

    /// Applies one update in place. `grads` must match the store layout.
    /// Throws DivergenceError on any non-finite gradient component.
    void step(ParamStore& params, const std::vector<std::vector<double>>& grads);

    std::int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::int64_t step_count_ = 0;
};

}  // namespace loe
