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

#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "squeezemag/error.hpp"
#include "squeezemag/estimators.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {
namespace {

using testing::binomial;
using testing::make_shot;
using testing::rng;

std::vector<double> column(const std::vector<SitePopulation> &s, bool diff) {
    std::vector<double> out;
    for (const auto &p : s) out.push_back(diff ? p.n_b - p.n_a : p.n_a + p.n_b);
    return out;
}

/// Shots of binomial sites with an optional common rotation of the Bloch
/// vector: p_b = (1 + sin(phi)) / 2 with phi ~ N(0, common_sigma) per shot.
std::vector<ShotRecord> binomial_shots(const std::vector<int> &n, int shots, double common_sigma, Stream &r) {
    std::vector<ShotRecord> out;
    for (int s = 0; s < shots; ++s) {
        const double p = 0.5 * (1.0 + std::sin(common_sigma * r.normal()));
        std::vector<std::pair<double, double>> ab;
        for (int ni : n) {
            const int b = binomial(ni, p, r);
            ab.push_back({double(ni - b), double(b)});
        }
        out.push_back(make_shot(s, ab));
    }
    return out;
}

Region span(int a, int b) {
    Region r;
    for (int i = a; i < b; ++i) r.push_back(i);
    return r;
}

TEST(Xi2Direct, WorkedExample) {
    // Var(N_b - N_a) = 100, 16 of detection noise, 400 atoms, balanced.
    const double d = std::sqrt(50.0);
    const std::vector<SitePopulation> series{{200 - d / 2, 200 + d / 2}, {200 + d / 2, 200 - d / 2}};
    EXPECT_NEAR(xi2_direct_value(series, {0, 1}, 16.0), 0.21, 1e-12);
}

TEST(Xi2Direct, BinomialShotsAreAtShotNoise) {
    auto r = rng(80);
    const auto shots = binomial_shots({400, 450, 500, 380}, 2000, 0.0, r);
    const auto est = xi2_direct(shots, span(0, 4), 0.0, {200, 9, 1});
    EXPECT_NEAR(est.value, 1.0, 3 * est.std_error);
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_EQ(est.n_shots, 2000);
    EXPECT_DOUBLE_EQ(est.ci_low, est.value - est.std_error);
}

TEST(Xi2Rel, BinomialHalvesAreAtShotNoise) {
    auto r = rng(81);
    const auto shots = binomial_shots({400, 450, 500, 380}, 2000, 0.0, r);
    const auto est = xi2_rel(shots, {0, 1}, {2, 3}, 0.0, {200, 9, 1});
    EXPECT_NEAR(est.value, 1.0, 3 * est.std_error);
}

TEST(Xi2Rel, IdenticalDifferenceGivesZero) {
    std::vector<ShotRecord> shots;
    for (int s = 0; s < 10; ++s) shots.push_back(make_shot(s, {{100 + s, 300 - s}, {100 + s, 300 - s}}));
    const auto l = region_series(shots, {0}), rr = region_series(shots, {1});
    EXPECT_EQ(xi2_rel_value(l, rr, all_indices(10), 0.0, 0.0), 0.0);
}

TEST(Xi2Rel, CommonModeOffsetIsRejectedExactly) {
    // Fixed totals and zero-mean offsets leave the classical reference alone,
    // and the shift cancels in dz.
    auto r = rng(82);
    const int shots = 300;
    auto base = binomial_shots({400, 520, 470, 610}, shots, 0.0, r);
    std::vector<double> offset(shots);
    double mean = 0;
    for (auto &o : offset) mean += (o = 0.1 * r.normal());
    mean /= shots;
    auto shifted = base;
    for (int s = 0; s < shots; ++s) {
        for (auto &c : shifted[s].sites) {
            const double n = c.n_a_det + c.n_b_det;
            const double dz = offset[s] - mean;
            c.n_b_det += 0.5 * n * dz;
            c.n_a_det -= 0.5 * n * dz;
        }
    }
    const Region left{0, 1}, right{2, 3};
    const auto idx = all_indices(shots);
    const double a = xi2_rel_value(region_series(base, left), region_series(base, right), idx, 16.0, 16.0);
    const double b = xi2_rel_value(region_series(shifted, left), region_series(shifted, right), idx, 16.0, 16.0);
    EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
    // Without the zero-mean constraint the variance of dz is still untouched.
    auto raw = base;
    for (int s = 0; s < shots; ++s)
        for (auto &c : raw[s].sites) {
            const double n = c.n_a_det + c.n_b_det;
            c.n_b_det += 0.5 * n * (offset[s] + 0.2);
            c.n_a_det -= 0.5 * n * (offset[s] + 0.2);
        }
    EXPECT_NEAR(xi2_rel_simplified_value(region_series(base, left), region_series(base, right), idx),
                xi2_rel_simplified_value(region_series(raw, left), region_series(raw, right), idx), 1e-10);
}

TEST(Xi2Rel, CommonModeNoiseOrdering) {
    for (int seed = 0; seed < 20; ++seed) {
        auto r = rng(100 + seed);
        const auto shots = binomial_shots({500, 520, 480, 510, 495, 505}, 200, 0.03, r);
        const auto l = region_series(shots, {0, 1, 2}), rr = region_series(shots, {3, 4, 5});
        const auto all = region_series(shots, span(0, 6));
        const auto idx = all_indices(shots.size());
        EXPECT_GE(xi2_direct_value(all, idx, 0.0), xi2_rel_value(l, rr, idx, 0.0, 0.0)) << seed;
    }
}

TEST(Xi2Rel, WeightedCombinationOfHalves) {
    // Independent halves with fixed totals: xi2_rel is the 1/N weighted mean
    // of the per-half number squeezing.
    auto r = rng(83);
    const int shots = 4000;
    const double nl = 1200, nr = 1200, xl = 0.5, xr = 0.3;
    std::vector<SitePopulation> ls, rs;
    for (int s = 0; s < shots; ++s) {
        const double dl = std::sqrt(xl * nl) * r.normal(), dr = std::sqrt(xr * nr) * r.normal();
        ls.push_back({0.5 * (nl - dl), 0.5 * (nl + dl)});
        rs.push_back({0.5 * (nr - dr), 0.5 * (nr + dr)});
    }
    const auto idx = all_indices(shots);
    const double el = xi2_direct_value(ls, idx, 0.0), er = xi2_direct_value(rs, idx, 0.0);
    const double combined = (el / nl + er / nr) / (1 / nl + 1 / nr);
    const auto est = bootstrap([&](const std::vector<std::size_t> &i) { return xi2_rel_value(ls, rs, i, 0, 0); },
                               shots, {200, 4, 1});
    EXPECT_NEAR(est.value, combined, 2 * est.std_error);
    EXPECT_NEAR(combined, 0.4, 0.05);
}

TEST(Xi2, DecibelRoundTrip) {
    for (double x : {1e-3, 0.21, 1.0, 7.5}) EXPECT_NEAR(units::from_db(units::to_db(x)), x, 1e-14 * x);
    EXPECT_NEAR(units::to_db(0.5), -3.0103, 1e-4);
}

TEST(Xi2, MetrologicalExamples) {
    EXPECT_DOUBLE_EQ(xi2_metrological(0.3, 1.0), 0.3);
    EXPECT_DOUBLE_EQ(xi2_metrological(1.0, 0.5), 4.0);
    EXPECT_NEAR(units::to_db(xi2_metrological(units::from_db(-3.8), 0.95)), -3.4, 0.05);
    EXPECT_THROW(xi2_metrological(1.0, 0.0), InvalidArgument);
}

TEST(FitFringe, ExactSinusoid) {
    std::vector<double> ph, z;
    for (int k = 0; k < 16; ++k) {
        ph.push_back(units::kTwoPi * k / 16);
        z.push_back(0.95 * std::sin(ph.back() + 0.7) - 0.02);
    }
    const auto f = fit_fringe(ph, z);
    EXPECT_NEAR(f.visibility, 0.95, 1e-12);
    EXPECT_NEAR(f.phase_offset, 0.7, 1e-12);
    EXPECT_NEAR(f.offset, -0.02, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FitFringe, PhaseShiftMovesOnlyTheOffsetPhase) {
    auto r = rng(84);
    std::vector<double> ph, z;
    for (int k = 0; k < 24; ++k) {
        ph.push_back(units::kTwoPi * r.uniform());
        z.push_back(0.8 * std::sin(ph.back() - 1.1) + 0.05 * r.normal());
    }
    const auto a = fit_fringe(ph, z);
    auto shifted = ph;
    for (auto &p : shifted) p += 0.4;
    const auto b = fit_fringe(shifted, z);
    EXPECT_NEAR(b.visibility, a.visibility, 1e-10);
    EXPECT_NEAR(std::remainder(b.phase_offset - (a.phase_offset - 0.4), units::kTwoPi), 0.0, 1e-10);
    EXPECT_NEAR(b.offset, a.offset, 1e-10);
}

TEST(FitFringe, ConstantDataAndDegenerateDesigns) {
    std::vector<double> ph{0, 1, 2, 3, 4, 5}, z(6, 0.3);
    const auto f = fit_fringe(ph, z);
    EXPECT_NEAR(f.visibility, 0.0, 1e-12);
    EXPECT_NEAR(f.offset, 0.3, 1e-12);
    EXPECT_THROW(fit_fringe({0.1, 0.1 + units::kPi, 0.1, 0.1 + units::kTwoPi}, {0, 1, 2, 3}), DegenerateInput);
    EXPECT_THROW(fit_fringe({0, 1}, {0, 1}), InsufficientData);
}

TEST(QuadraticNoise, BinomialHasNoQuadraticTerm) {
    const std::vector<double> n{1000, 2000, 4000, 8000}, v = n;
    const auto f = fit_quadratic_noise(n, v);
    EXPECT_NEAR(f.beta2, 0.0, 1e-12);
    EXPECT_NEAR(f.linear_term, 1.0, 1e-12);
    EXPECT_THROW(fit_quadratic_noise({1, 2}, {1, 2}), InsufficientData);
}

TEST(QuadraticNoise, InjectedCommonModeRecovered) {
    auto r = rng(85);
    std::vector<int> n;
    for (int i = 0; i < 16; ++i) n.push_back(350 + static_cast<int>(r.below(250)));
    std::vector<SiteParams> sites(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) sites[i] = {static_cast<int>(i), n[i], 0, 0, 5.5 * i};
    const double s = 0.05, injected = 0.5 * (1 - std::exp(-2 * s * s));
    const auto shots = binomial_shots(n, 1500, s, r);
    CombinationOptions o;
    o.max_subsets = 40;
    const auto curve = combination_variance_curve(shots, sites, {1000, 2000, 3000, 4000, 5000, 6000}, 0.0, o, r);
    std::vector<double> x, y;
    for (const auto &p : curve) {
        x.push_back(p.n_mean);
        y.push_back(p.variance);
    }
    const auto f = fit_quadratic_noise(x, y);
    EXPECT_NEAR(f.beta2 / injected, 1.0, 0.12);
}

TEST(Bootstrap, ConstantStatisticHasZeroWidth) {
    const std::vector<double> x(50, 3.0);
    const auto e = bootstrap([&](const std::vector<std::size_t> &i) { return sample_variance(x, i); }, x.size(),
                             {100, 1, 1});
    EXPECT_EQ(e.value, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
    EXPECT_EQ(e.n_resamples, 100);
}

TEST(Bootstrap, MeanOfGaussianFollowsStandardErrorLaw) {
    auto r = rng(86);
    std::vector<double> x(1000);
    for (auto &v : x) v = 2.0 * r.normal();
    const auto e =
        bootstrap([&](const std::vector<std::size_t> &i) { return sample_mean(x, i); }, x.size(), {1000, 2, 1});
    EXPECT_NEAR(e.std_error / (2.0 / std::sqrt(1000.0)), 1.0, 0.1);
}

TEST(Bootstrap, ErrorsAndWorkerInvariance) {
    const auto stat = [](const std::vector<std::size_t> &i) { return double(i.size()); };
    EXPECT_THROW(bootstrap(stat, 0, {100, 1, 1}), InsufficientData);
    EXPECT_THROW(bootstrap(stat, 1, {100, 1, 1}), InsufficientData);
    EXPECT_THROW(bootstrap(stat, 10, {20, 1, 1}), InvalidArgument);
    std::vector<double> x(200);
    auto r = rng(87);
    for (auto &v : x) v = r.normal();
    const auto f = [&](const std::vector<std::size_t> &i) { return sample_variance(x, i); };
    const auto a = bootstrap(f, x.size(), {300, 5, 1}), b = bootstrap(f, x.size(), {300, 5, 4});
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(RegionSeries, SumsDetectedPopulations) {
    const std::vector<ShotRecord> shots{make_shot(0, {{1, 2}, {3, 4}, {5, 6}})};
    const auto s = region_series(shots, {0, 2});
    EXPECT_DOUBLE_EQ(s[0].n_a, 6);
    EXPECT_DOUBLE_EQ(s[0].n_b, 8);
    EXPECT_EQ(column(s, true)[0], 2.0);
}

}  // namespace
}  // namespace squeezemag
