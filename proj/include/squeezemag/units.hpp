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

// Unit conversions and the physical constants of the default experiment.
//
// Internally everything is SI with angular frequencies in rad/s and angles in
// radians. Config files and CSV/JSON outputs use Hz, seconds, Tesla and
// degrees (for tomography angles); every conversion goes through here.

#pragma once

#include <cmath>
#include <numbers>

namespace squeezemag::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double hz_to_rad_per_s(double hz) { return kTwoPi * hz; }
constexpr double rad_per_s_to_hz(double w) { return w / kTwoPi; }
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

constexpr double gauss_to_tesla(double g) { return g * 1e-4; }
constexpr double tesla_to_gauss(double t) { return t * 1e4; }

/// Linear power ratio to decibels.
inline double to_db(double ratio) { return 10.0 * std::log10(ratio); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// ---------------------------------------------------------------------------
// Defaults of the lattice experiment.

/// Reference atom number at which chi and the detuning slope are anchored.
inline constexpr int kReferenceAtoms = 500;
/// One-axis-twisting strength at 500 atoms, 2pi x 0.064 Hz.
inline constexpr double kChiAt500 = kTwoPi * 0.064;
/// Detuning slope 1 Hz per 40 atoms, in rad/s per atom.
inline constexpr double kDeltaSlope = kTwoPi / 40.0;
/// Lattice period in micrometres.
inline constexpr double kLatticeSpacingUm = 5.5;
/// Two-photon Rabi frequency used for generation and readout pulses (rad/s).
inline constexpr double kTwoPhotonRabi = kTwoPi * 310.0;
/// One-photon swap Rabi frequency (Hz); a swap pi pulse lasts 1/(2 f).
inline constexpr double kSwapRabiHz = 7000.0;
inline constexpr double kSwapPiTime = 1.0 / (2.0 * kSwapRabiHz);
/// Bias field, 9.12 G.
inline constexpr double kBiasField = 9.12e-4;
/// Phase-squeezing readout rotation, 75.5 degrees.
inline constexpr double kPhaseSqueezeAngle = 75.5 * kPi / 180.0;
/// Experimental cycle time (s) used for the per-root-Hz figure.
inline constexpr double kCycleTime = 36.0;

// Anchor for the swapped-state field sensitivity: a classical device with
// 12300 atoms, unit visibility and 342 us interrogation has a 382 pT
// shot-noise limit.
inline constexpr double kSqlAnchorTesla = 382e-12;
inline constexpr double kSqlAnchorInterrogation = 342e-6;
inline constexpr double kSqlAnchorAtoms = 12300.0;

/// Swapped-state sensitivity S in Hz/T obtained by inverting the shot-noise
/// formula at the anchor above (about 1.10e10 Hz/T = 1.10e4 Hz/uT).
inline double default_swap_sensitivity() {
    return 1.0 / (kTwoPi * kSqlAnchorTesla * kSqlAnchorInterrogation * std::sqrt(kSqlAnchorAtoms));
}

}  // namespace squeezemag::units
