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

#include "loe/labels.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "loe/errors.hpp"
#include "loe/rng.hpp"

using namespace loe;

namespace {

// Exhaustive minimizer over all hard assignments with exactly k ones.
double brute_force_best_joint(const std::vector<double>& ln, const std::vector<double>& la,
                              std::size_t k) {
    const std::size_t m = ln.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            total += (mask >> i) & 1u ? la[i] : ln[i];
        }
        best = std::min(best, total);
    }
    return best;
}

}  // namespace

TEST_CASE("training scores are elementwise differences") {
    const std::vector<double> ln = {1.0, 4.0};
    const std::vector<double> la = {1.0, 0.25};
    CHECK(training_scores(ln, la) == std::vector<double>{0.0, 3.75});

    const std::vector<double> same = {0.3, 0.7, 2.0};
    CHECK(training_scores(same, same) == std::vector<double>{0.0, 0.0, 0.0});

    CHECK_THROWS_AS(training_scores(ln, same), ConfigError);
}

TEST_CASE("assign_labels flags the top-scoring quantile") {
    const std::vector<double> s = {1.0, 5.0, 2.0, 9.0};
    const LabelAssignment hard = assign_labels(s, 0.25, LabelMode::kHard);
    CHECK(hard.y == std::vector<double>{0.0, 0.0, 0.0, 1.0});

    const LabelAssignment none = assign_labels(s, 0.0, LabelMode::kHard);
    CHECK(none.y == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    CHECK(assign_labels(s, 0.0, LabelMode::kSoft).y == std::vector<double>{0.0, 0.0, 0.0, 0.0});

    // All-equal scores: ties break toward the lowest index.
    const std::vector<double> tied = {3.0, 3.0, 3.0, 3.0};
    const LabelAssignment t = assign_labels(tied, 0.5, LabelMode::kHard);
    CHECK(t.y == std::vector<double>{1.0, 1.0, 0.0, 0.0});

    const LabelAssignment soft = assign_labels(s, 0.5, LabelMode::kSoft);
    CHECK(soft.y == std::vector<double>{0.0, 0.5, 0.0, 0.5});

    CHECK_THROWS_AS(assign_labels(s, 1.0, LabelMode::kHard), ConfigError);
    CHECK_THROWS_AS(assign_labels(std::vector<double>{}, 0.1, LabelMode::kHard), ConfigError);
}

TEST_CASE("joint loss selector semantics") {
    {
        LabelAssignment y;
        y.y = {0.0, 0.0, 0.0};
        const std::vector<double> ln = {1.0, 2.0, 3.0};
        const std::vector<double> la = {9.0, 9.0, 9.0};
        CHECK(joint_loss(ln, la, y) == 6.0);  // Blind reduction: sum of L_n
    }
    {
        LabelAssignment y;
        y.mode = LabelMode::kSoft;
        y.y = {0.5};
        CHECK(joint_loss(std::vector<double>{2.0}, std::vector<double>{4.0}, y) == 3.0);
    }
    {
        LabelAssignment y;
        y.y = {0.0, 1.0};
        CHECK(joint_loss(std::vector<double>{1.0, 9.0}, std::vector<double>{7.0, 2.0}, y) == 3.0);
    }
}

TEST_CASE("soft-flagged samples contribute exactly the mean of both losses") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double ln = std::exp(rng.normal());
        const double la = std::exp(rng.normal());
        LabelAssignment y;
        y.mode = LabelMode::kSoft;
        y.y = {0.5};
        const double got = joint_loss(std::vector<double>{ln}, std::vector<double>{la}, y);
        CHECK(std::abs(got - 0.5 * (ln + la)) <= 1e-14 * std::max(1.0, std::abs(got)));
    }
}

TEST_CASE("cardinality: flagged count is exactly round(alpha * M)") {
    Rng rng(123);
    const std::vector<double> alphas = {0.0, 0.05, 0.1, 0.2, 0.5};
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + rng.below(40);
        std::vector<double> s(m);
        for (auto& v : s) v = rng.normal();
        for (double alpha : alphas) {
            const auto k = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(m)));
            const LabelAssignment hard = assign_labels(s, alpha, LabelMode::kHard);
            CHECK(hard.flagged_count() == k);
            double hard_sum = 0.0;
            for (double v : hard.y) hard_sum += v;
            CHECK(hard_sum == static_cast<double>(k));

            const LabelAssignment soft = assign_labels(s, alpha, LabelMode::kSoft);
            CHECK(soft.flagged_count() == k);
            double soft_sum = 0.0;
            for (double v : soft.y) soft_sum += v;
            CHECK(soft_sum == 0.5 * static_cast<double>(k));
        }
    }
}

TEST_CASE("assign_labels minimizes the joint loss over the hard constraint set") {
    Rng rng(321);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t m = 2 + rng.below(11);  // M <= 12
        std::vector<double> ln(m), la(m);
        for (auto& v : ln) v = std::exp(rng.normal());
        for (auto& v : la) v = std::exp(rng.normal());
        const double alpha = rng.uniform() * 0.9;
        const auto k = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(m)));

        const LabelAssignment y = assign_labels(training_scores(ln, la), alpha, LabelMode::kHard);
        const double achieved = joint_loss(ln, la, y);
        const double best = brute_force_best_joint(ln, la, k);
        CHECK(achieved <= best + 1e-12);
        CHECK(achieved == doctest::Approx(best).epsilon(1e-12));
    }
}
