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

// Experiment programs for one lattice site and their executor.
//
// Phases stored in a Sequence are laboratory phases of the coupling field,
// referenced to the first pi/2 pulse. The executor drives the collective spin
// with operator phase -phase, i.e. the coupling (Omega/2)(e^{i phase} J+ + h.c.)
// in the basis where J+ raises the |b> population. With that convention the
// first pulse (phase 0) puts the mean spin on +y, a phase pi/2 readout of
// angle alpha > 0 turns the anti-squeezed axis towards the equator, and
// (75.5 deg, 3pi/2) after 20 ms of twisting leaves a phase-squeezed state.

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "squeezemag/collective_spin.hpp"
#include "squeezemag/lattice.hpp"
#include "squeezemag/loss.hpp"
#include "squeezemag/noise.hpp"
#include "squeezemag/random.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

namespace step {

struct Pulse {
    double rabi = units::kTwoPhotonRabi;  // rad/s
    double phase = 0.0;                   // laboratory phase, rad
    double duration = 0.0;                // s; the rotation angle is rabi * duration
    bool ideal = false;                   // instantaneous rotation instead of evolve_pulse
    bool echo = false;                    // marks the spin-echo pulse (echo_deficit applies)
};

struct FreeOAT {
    double duration = 0.0;
};

struct SwapOut {
    double t_pi = units::kSwapPiTime;
};

struct Hold {
    double duration = 0.0;
};

struct SwapIn {
    double t_pi = units::kSwapPiTime;
};

struct Readout {
    enum class Kind { Tomography, Ramsey };
    Kind kind = Kind::Tomography;
    double angle = 0.0;  // rad, >= 0; pi/2 for Ramsey
    double phase = 0.0;  // laboratory phase, rad
    double rabi = units::kTwoPhotonRabi;
    bool ideal = false;

    /// Tomography rotation by |alpha|: phase pi/2 for alpha >= 0, 3pi/2 for alpha < 0.
    static Readout tomography(double alpha);
    /// Final pi/2 pulse with readout phase Phi.
    static Readout ramsey(double phi);
};

}  // namespace step

using SequenceStep = std::variant<step::Pulse, step::FreeOAT, step::SwapOut, step::Hold, step::SwapIn, step::Readout>;

struct Sequence {
    std::string name;
    std::vector<SequenceStep> steps;

    /// Durations finite and >= 0; Hold only inside SwapOut..SwapIn; swaps
    /// balanced and not nested; no pulses or twisting while swapped; at most
    /// one Readout, and it is last. Throws InvalidArgument.
    void validate() const;
};

struct OatOptions {
    double rabi = units::kTwoPhotonRabi;
    bool echo = true;
    bool ideal_pulses = false;
};

/// pi/2 (phase 0), FreeOAT(t/2), echo pi (phase 3pi/2), FreeOAT(t/2), tomography
/// readout. Without echo a single FreeOAT(t).
Sequence make_oat_sequence(double evolution_total, double tomography_angle, const OatOptions &options = {});

struct RamseyOptions {
    double evolution_total = 20e-3;
    double phase_squeeze_angle = units::kPhaseSqueezeAngle;
    double t_pi = units::kSwapPiTime;
    OatOptions oat;
};

/// Generation (no readout), rotation (phase_squeeze_angle, 3pi/2), SwapOut,
/// Hold(t_hold), SwapIn, then `readout`.
Sequence make_ramsey_sequence(double t_hold, const step::Readout &readout, const RamseyOptions &options = {});

/// Interrogation time t_hold + 2 t_pi of a sequence (0 without swaps).
double interrogation_time(const Sequence &seq);

/// Static parameters of the magnetometry protocol.
struct ProtocolParams {
    double swap_sensitivity = units::default_swap_sensitivity();  // S, Hz/T
    double field_offset = 0.0;         // T, static offset from B0 seen by every site
    double field_gradient = 0.0;       // T/um along the lattice
    double gradient_origin_um = 0.0;   // position where the gradient contributes zero
    double swap_detuning = 0.0;        // Hz, detuning of the swap transition
    double chi_hold = 0.0;             // rad/s, residual twisting while swapped
    bool ideal_pulses = false;         // override every pulse to an ideal rotation
    double echo_deficit = 0.0;         // rad; > 0 replaces the echo by an ideal pi - deficit rotation
};

/// Optional context for execute. With `lattice` set, chi and delta follow
/// the current atom number (needed once loss changes it); with `loss`
/// enabled and `loss_rng` set, FreeOAT segments run as quantum-jump
/// trajectories.
struct ExecutionEnv {
    const LatticeConfig *lattice = nullptr;
    const LossConfig *loss = nullptr;
    Stream *loss_rng = nullptr;
    double gen_field_to_detuning = NoiseConfig{}.gen_field_to_detuning;  // Hz/T
};

/// Static field difference from B0 at a site (T), without the shot noise.
double site_field(const SiteParams &site, const ProtocolParams &params);

/// Runs `seq` on one site starting from |all a>.
CollectiveState execute(const Sequence &seq, const SiteParams &site, const ShotNoise &noise,
                        const ProtocolParams &params, const ExecutionEnv &env = {});

/// Same, from a given initial state.
CollectiveState execute_from(const CollectiveState &initial, const Sequence &seq, const SiteParams &site,
                             const ShotNoise &noise, const ProtocolParams &params, const ExecutionEnv &env = {});

}  // namespace squeezemag
