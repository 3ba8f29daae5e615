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
#include "squeezemag/magnetometry.hpp"
#include "squeezemag/measurement.hpp"
#include "squeezemag/noise.hpp"
#include "squeezemag/pipeline.hpp"

namespace squeezemag {
namespace {

using testing::rng;
using units::kPi;
using units::kTwoPi;

TEST(Noise, AllOffGivesExactZeros) {
    auto r = rng(40);
    for (int i = 0; i < 100; ++i) {
        const auto n = draw_shot_noise(NoiseConfig::none(), r);
        EXPECT_EQ(n.field_offset, 0.0);
        EXPECT_EQ(n.gen_detuning, 0.0);
        EXPECT_EQ(n.pulse_detuning, 0.0);
    }
}

TEST(Noise, FieldSpreadMatchesSigma) {
    auto r = rng(41);
    NoiseConfig c = NoiseConfig::none();
    c.field_sigma_shot = 3e-9;
    std::vector<double> x;
    for (int i = 0; i < 100000; ++i) x.push_back(draw_shot_noise(c, r).field_offset);
    EXPECT_NEAR(std::sqrt(sample_variance(x, all_indices(x.size()))) / 3e-9, 1.0, 0.01);
}

TEST(Noise, FieldDerivedGenerationDetuning) {
    auto r = rng(42);
    NoiseConfig c;
    c.gen_mode = GenDetuningMode::FieldDerived;
    for (int i = 0; i < 10; ++i) {
        const auto n = draw_shot_noise(c, r);
        EXPECT_NEAR(n.gen_detuning, kTwoPi * c.gen_field_to_detuning * n.field_offset, 1e-12);
    }
    // 3 nT at 10 Hz/mG is 0.3 Hz.
    EXPECT_NEAR(c.gen_field_to_detuning * 3e-9, 0.3, 1e-12);
}

TEST(Noise, DetuningDuringHold) {
    const NoiseConfig c;
    EXPECT_EQ(detuning_during_hold(c, 0.0, 1.4e7), 0.0);
    EXPECT_NEAR(detuning_during_hold(c, 3e-9, 1.4e7), kTwoPi * 0.042, 1e-12);
}

TEST(Noise, SwapRatioCheck) {
    const NoiseConfig c;
    EXPECT_FALSE(check_swap_ratio(c, 140 * c.gen_field_to_detuning).has_value());
    EXPECT_TRUE(check_swap_ratio(c, units::default_swap_sensitivity()).has_value());
}

TEST(Noise, DriftBlocksAreShared) {
    NoiseConfig c;
    c.longterm_enabled = true;
    EXPECT_NEAR(drift_block_sigma(c), std::sqrt(4.5e-9 * 4.5e-9 - 3e-9 * 3e-9), 1e-20);
    EXPECT_EQ(draw_drift_offset(c, 7, 3), draw_drift_offset(c, 7, 3));
    EXPECT_NE(draw_drift_offset(c, 7, 3), draw_drift_offset(c, 7, 4));
}

TEST(Noise, NegativeSigmaRejected) {
    NoiseConfig c;
    c.pulse_detuning_sigma = -1;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Noise, ZeroNoiseIsBitIdenticalToNoiseFree) {
    auto r = rng(43);
    const LatticeConfig lc;
    const SiteParams site{0, 420, chi_of_n(lc, 420), delta_of_n(lc, 420), 0.0};
    const auto seq = make_oat_sequence(20e-3, 0.2);
    const auto a = execute(seq, site, draw_shot_noise(NoiseConfig::none(), r), {});
    const auto b = execute(seq, site, ShotNoise{}, {});
    ASSERT_EQ(a.amplitudes().size(), b.amplitudes().size());
    for (int k = 0; k < a.dim(); ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Noise, GenerationNoiseGrowsQuadraticallyWithoutEcho) {
    // CSS readout of the azimuthal component: projection noise is N, the
    // common detuning adds a term in N^2.
    RunConfig config;
    config.lattice.n_sites = 24;
    config.lattice.atom_number_law = {AtomNumberLaw::Kind::Constant, 500, 500, {}};
    config.lattice.chi_ref = 1e-9;  // no twisting
    config.noise = NoiseConfig::none();
    config.noise.gen_detuning_sigma = 0.45;
    config.noise.detection_sigma = 0.0;
    config.sequence = make_oat_sequence(20e-3, kPi / 2, {units::kTwoPhotonRabi, false, true});
    config.n_shots = 400;
    config.master_seed = 5;
    const auto batch = simulate(config);
    std::vector<double> n_tot, excess;
    for (int k = 1; k <= 24; ++k) {
        Region reg;
        for (int i = 0; i < k; ++i) reg.push_back(i);
        const auto series = region_series(batch.records[0], reg);
        std::vector<double> d;
        for (const auto &p : series) d.push_back(p.n_b - p.n_a);
        const double n = 500.0 * k;
        n_tot.push_back(n);
        excess.push_back(sample_variance(d, all_indices(d.size())) - n);
        ASSERT_GT(excess.back(), 0.0);
    }
    EXPECT_NEAR(log_log_slope(n_tot, excess), 2.0, 0.1);
}

TEST(Measurement, NoDetectionNoiseKeepsTruth) {
    auto r = rng(44);
    const auto s = make_css(300, kPi / 2, 0.0);
    const auto rec = measure_shot({s, s}, NoiseConfig::none(), r);
    ASSERT_EQ(rec.sites.size(), 2u);
    for (const auto &c : rec.sites) {
        EXPECT_EQ(c.n_a_det, c.n_a_true);
        EXPECT_EQ(c.n_b_det, c.n_b_true);
        EXPECT_EQ(c.n_a_true + c.n_b_true, 300);
    }
}

TEST(Measurement, AllBWithDetectionNoise) {
    auto r = rng(45);
    const auto s = CollectiveState::dicke(400, 400);
    NoiseConfig c = NoiseConfig::none();
    c.detection_sigma = 4.0;
    std::vector<double> a, b;
    for (int i = 0; i < 20000; ++i) {
        const auto rec = measure_shot({s}, c, r);
        EXPECT_EQ(rec.sites[0].n_b_true, 400);
        a.push_back(rec.sites[0].n_a_det);
        b.push_back(rec.sites[0].n_b_det);
    }
    const auto idx = all_indices(a.size());
    EXPECT_NEAR(sample_mean(b, idx), 400.0, 5 * 4 / std::sqrt(20000.0));
    EXPECT_NEAR(sample_mean(a, idx), 0.0, 5 * 4 / std::sqrt(20000.0));
    EXPECT_NEAR(std::sqrt(sample_variance(b, idx)), 4.0, 0.15);
    EXPECT_NEAR(std::sqrt(sample_variance(a, idx)), 4.0, 0.15);
}

TEST(Measurement, CoherentStateDifferenceVariance) {
    auto r = rng(46);
    const auto s = make_css(400, kPi / 2, 0.0);
    NoiseConfig c = NoiseConfig::none();
    c.detection_sigma = 4.0;
    std::vector<double> d;
    const int shots = 40000;
    for (int i = 0; i < shots; ++i) {
        const auto rec = measure_shot({s}, c, r);
        d.push_back(rec.sites[0].n_b_det - rec.sites[0].n_a_det);
    }
    EXPECT_NEAR(sample_variance(d, all_indices(d.size())), 432.0, 5 * 432.0 * std::sqrt(2.0 / shots));
}

TEST(Measurement, ImbalanceExamples) {
    EXPECT_EQ(imbalance({200, 200}), 0.0);
    EXPECT_DOUBLE_EQ(imbalance({100, 300}), 0.5);
    EXPECT_THROW(imbalance({0, 0}), DegenerateInput);
}

TEST(Measurement, CommonModeCancelsInDifference) {
    const auto shot = testing::make_shot(0, {{100, 300}, {50, 150}, {120, 360}, {10, 30}});
    const auto v = imbalances(shot, RegionSpec{{{0, 1}, {2, 3}}});
    ASSERT_EQ(v.z.size(), 2u);
    EXPECT_DOUBLE_EQ(v.z[0], 0.5);
    EXPECT_DOUBLE_EQ(v.dz, 0.0);
}

}  // namespace
}  // namespace squeezemag
