// Copyright 2026 The squeezemag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared test utilities.

#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "squeezemag/collective_spin.hpp"
#include "squeezemag/lattice.hpp"
#include "squeezemag/measurement.hpp"
#include "squeezemag/random.hpp"

namespace squeezemag::testing {

inline Stream rng(std::uint64_t id) { return substream(2026, StreamPurpose::Test, {id}); }

/// Random normalised state of n atoms.
inline CollectiveState random_state(int n, Stream &r) {
    std::vector<cdouble> a(n + 1);
    double norm = 0.0;
    for (auto &x : a) {
        x = {r.normal(), r.normal()};
        norm += std::norm(x);
    }
    for (auto &x : a) x /= std::sqrt(norm);
    return CollectiveState(n, a);
}

/// Moments agree entry by entry.
inline void expect_same_moments(const SpinMoments &a, const SpinMoments &b, double tol) {
    EXPECT_NEAR(a.mean_jx, b.mean_jx, tol);
    EXPECT_NEAR(a.mean_jy, b.mean_jy, tol);
    EXPECT_NEAR(a.mean_jz, b.mean_jz, tol);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.cov[i][j], b.cov[i][j], tol) << i << "," << j;
}

/// One shot of per-site populations without any noise bookkeeping.
inline ShotRecord make_shot(std::int64_t index, const std::vector<std::pair<double, double>> &ab) {
    ShotRecord r;
    r.shot_index = index;
    for (auto [a, b] : ab) {
        SiteCounts c;
        c.n_a_true = static_cast<int>(std::lround(a));
        c.n_b_true = static_cast<int>(std::lround(b));
        c.n_a_det = a;
        c.n_b_det = b;
        r.sites.push_back(c);
    }
    return r;
}

/// Binomial draw by summing Bernoulli trials (small n only).
inline int binomial(int n, double p, Stream &r) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += r.uniform() < p;
    return k;
}

}  // namespace squeezemag::testing
