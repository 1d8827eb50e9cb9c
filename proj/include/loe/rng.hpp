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
#include <random>
#include <vector>

namespace loe {

/// Seeded random source with a fully specified draw sequence.
///
/// Built on std::mt19937_64 (whose output sequence is pinned by the standard)
/// with hand-rolled uniform/normal mappings, so that identical seeds yield
/// identical streams regardless of standard-library vendor. Normal variates
/// use the Marsaglia polar method (a Box-Muller variant that avoids libm
/// sin/cos).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent substream: mixes (seed, stream) through splitmix64.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();

    /// Standard normal variate.
    double normal();
    double normal(double mean, double stddev);

    /// Uniform integer in [0, n). Multiply-shift reduction; the bias is
    /// below 2^-64 and irrelevant next to reproducibility.
    std::uint64_t below(std::uint64_t n);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// splitmix64 mixing step; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace loe
