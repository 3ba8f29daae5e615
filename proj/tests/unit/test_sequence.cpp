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
#include "squeezemag/sequence.hpp"

namespace squeezemag {
namespace {

using units::kPi;
using units::kTwoPi;

SiteParams site500() {
    const LatticeConfig c;
    return {0, 500, chi_of_n(c, 500), delta_of_n(c, 500), 0.0};
}

double z_of(const CollectiveState &s) { return 2.0 * moments(s).mean_jz / s.n_atoms(); }

TEST(Sequence, OatWithEchoSplitsEvolution) {
    const auto seq = make_oat_sequence(20e-3, 0.3);
    ASSERT_EQ(seq.steps.size(), 5u);
    const auto &first = std::get<step::Pulse>(seq.steps[0]);
    EXPECT_NEAR(first.rabi * first.duration, kPi / 2, 1e-12);
    EXPECT_DOUBLE_EQ(first.phase, 0.0);
    EXPECT_DOUBLE_EQ(std::get<step::FreeOAT>(seq.steps[1]).duration, 10e-3);
    const auto &echo = std::get<step::Pulse>(seq.steps[2]);
    EXPECT_TRUE(echo.echo);
    EXPECT_NEAR(echo.rabi * echo.duration, kPi, 1e-12);
    EXPECT_DOUBLE_EQ(echo.phase, 1.5 * kPi);
    EXPECT_DOUBLE_EQ(std::get<step::FreeOAT>(seq.steps[3]).duration, 10e-3);
    const auto &r = std::get<step::Readout>(seq.steps[4]);
    EXPECT_DOUBLE_EQ(r.angle, 0.3);
    EXPECT_DOUBLE_EQ(r.phase, kPi / 2);
    EXPECT_DOUBLE_EQ(step::Readout::tomography(-0.3).phase, 1.5 * kPi);
    EXPECT_DOUBLE_EQ(step::Readout::tomography(-0.3).angle, 0.3);
}

TEST(Sequence, RamseyTimingAndRotation) {
    EXPECT_NEAR(units::kSwapPiTime, 71.4286e-6, 1e-9);
    const auto s1 = make_ramsey_sequence(1e-6, step::Readout::ramsey(0.0));
    EXPECT_NEAR(interrogation_time(s1), 143.9e-6, 0.1e-6);
    const auto s2 = make_ramsey_sequence(342e-6 - 2 * units::kSwapPiTime, step::Readout::ramsey(0.0));
    EXPECT_NEAR(interrogation_time(s2), 342e-6, 1e-12);
    const auto &rot = std::get<step::Pulse>(s1.steps[4]);
    EXPECT_NEAR(rot.rabi * rot.duration, units::deg_to_rad(75.5), 1e-12);
    EXPECT_DOUBLE_EQ(rot.phase, 1.5 * kPi);
    EXPECT_TRUE(std::holds_alternative<step::SwapOut>(s1.steps[5]));
    EXPECT_DOUBLE_EQ(interrogation_time(make_oat_sequence(20e-3, 0)), 0.0);
}

TEST(Sequence, ValidationRejectsMalformedPrograms) {
    Sequence hold_outside{"x", {step::Hold{1e-6}}};
    EXPECT_THROW(hold_outside.validate(), InvalidArgument);
    Sequence unbalanced{"x", {step::SwapOut{}}};
    EXPECT_THROW(unbalanced.validate(), InvalidArgument);
    Sequence pulse_swapped{"x", {step::SwapOut{}, step::Pulse{}, step::SwapIn{}}};
    EXPECT_THROW(pulse_swapped.validate(), InvalidArgument);
    Sequence readout_not_last{"x", {step::Readout::ramsey(0), step::FreeOAT{1e-3}}};
    EXPECT_THROW(readout_not_last.validate(), InvalidArgument);
    Sequence negative{"x", {step::FreeOAT{-1.0}}};
    EXPECT_THROW(negative.validate(), InvalidArgument);
}

TEST(Execute, EmptySequenceAndZeroDurations) {
    const auto site = site500();
    const CollectiveState all_a(500);
    EXPECT_LT(phase_insensitive_distance(execute(Sequence{}, site, {}, {}), all_a), 1e-15);
    Sequence zeros{"z", {step::Pulse{units::kTwoPhotonRabi, 0.4, 0.0}, step::FreeOAT{0.0}, step::SwapOut{0.0},
                         step::Hold{0.0}, step::SwapIn{0.0}}};
    EXPECT_LT(phase_insensitive_distance(execute(zeros, site, {}, {}), all_a), 1e-15);
}

TEST(Execute, TwoHalfPulsesMakeAFlip) {
    const auto site = site500();
    ProtocolParams ideal;
    ideal.ideal_pulses = true;
    const step::Pulse half{units::kTwoPhotonRabi, 0.0, 0.5 * kPi / units::kTwoPhotonRabi};
    const auto s = execute(Sequence{"pp", {half, half}}, site, {}, ideal);
    EXPECT_NEAR(std::abs(s[500]), 1.0, 1e-10);
}

TEST(Execute, IdealOatMatchesTwistedCss) {
    // The echo cancels delta, so the ideal-pulse program equals plain twisting
    // of the equatorial CSS followed by the pi rotation.
    const auto site = site500();
    ProtocolParams ideal;
    ideal.ideal_pulses = true;
    auto seq = make_oat_sequence(20e-3, 0.0);
    seq.steps.pop_back();
    const auto got = execute(seq, site, {}, ideal);
    const auto css = rotate(CollectiveState(500), {kPi / 2, 0.0});
    const auto expect = rotate(evolve_oat(css, site.chi, 0.0, 20e-3), {kPi, -1.5 * kPi});
    testing::expect_same_moments(moments(got), moments(expect), 1e-7);
}

TEST(Execute, FirstPulsePutsSpinOnPlusY) {
    ProtocolParams ideal;
    ideal.ideal_pulses = true;
    const step::Pulse half{units::kTwoPhotonRabi, 0.0, 0.5 * kPi / units::kTwoPhotonRabi};
    const auto m = moments(execute(Sequence{"p", {half}}, site500(), {}, ideal));
    EXPECT_NEAR(m.mean_jy, 250.0, 1e-9);
    EXPECT_NEAR(m.mean_jx, 0.0, 1e-9);
}

struct Fringe {
    double visibility;
    double phase;
};

Fringe ramsey_fringe(const SiteParams &site, const ShotNoise &noise, const ProtocolParams &p, double t_hold) {
    std::vector<double> phases, z;
    for (int k = 0; k < 12; ++k) {
        const double phi = kTwoPi * k / 12;
        auto r = step::Readout::ramsey(phi);
        r.ideal = true;
        phases.push_back(phi);
        z.push_back(z_of(execute(make_ramsey_sequence(t_hold, r), site, noise, p)));
    }
    const auto f = fit_fringe(phases, z);
    return {f.visibility, f.phase_offset};
}

TEST(Execute, RamseyVisibilityIsTransverseLength) {
    const auto site = site500();
    ProtocolParams p;
    p.ideal_pulses = true;
    Sequence before = make_ramsey_sequence(1e-6, step::Readout::ramsey(0));
    before.steps.pop_back();
    const auto m = moments(execute(before, site, {}, p));
    const double transverse = 2.0 * std::hypot(m.mean_jx, m.mean_jy) / 500.0;
    EXPECT_NEAR(ramsey_fringe(site, {}, p, 1e-6).visibility, transverse, 1e-8);
}

TEST(Execute, SwappedPhaseIsLinearInFieldAndDetuning) {
    const auto site = site500();
    ProtocolParams p;
    p.ideal_pulses = true;
    const double t_hold = 200e-6, t_int = t_hold + 2 * units::kSwapPiTime;
    const auto ref = ramsey_fringe(site, {}, p, t_hold);
    for (double db : {1e-12, 5e-11, -2e-10}) {
        for (double det : {0.0, 3.0}) {
            ShotNoise noise;
            noise.field_offset = db;
            ProtocolParams q = p;
            q.swap_detuning = det;
            const auto f = ramsey_fringe(site, noise, q, t_hold);
            const double expect = kTwoPi * (q.swap_sensitivity * db + det) * t_int;
            EXPECT_NEAR(std::remainder(f.phase - ref.phase - expect, kTwoPi), 0.0, 1e-6)
                << db << " " << det;
        }
    }
}

TEST(Execute, SiteFieldFollowsGradient) {
    ProtocolParams p;
    p.field_offset = 1e-9;
    p.field_gradient = 2e-12;
    p.gradient_origin_um = 10.0;
    SiteParams s;
    s.position_um = 15.5;
    EXPECT_NEAR(site_field(s, p), 1e-9 + 11e-12, 1e-24);
}

}  // namespace
}  // namespace squeezemag
