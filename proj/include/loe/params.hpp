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

#include <string>
#include <vector>

#include "loe/errors.hpp"

namespace loe {

struct Param {
    std::string name;
    std::vector<double> values;
};

/// Ordered collection of named parameter vectors. Order is the contract:
/// gradients, optimizer moments, and checkpoints all follow it.
class ParamStore {
public:
    void add(std::string name, std::vector<double> values) {
        params_.push_back({std::move(name), std::move(values)});
    }

    std::size_t count() const { return params_.size(); }

    Param& operator[](std::size_t i) { return params_[i]; }
    const Param& operator[](std::size_t i) const { return params_[i]; }

    std::vector<double>& values(const std::string& name) {
        for (Param& p : params_) {
            if (p.name == name) return p.values;
        }
        throw ConfigError("unknown parameter: " + name);
    }

    const std::vector<double>& values(const std::string& name) const {
        return const_cast<ParamStore*>(this)->values(name);
    }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const Param& p : params_) n += p.values.size();
        return n;
    }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::vector<Param> params_;
};

}  // namespace loe
