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

// Per-shot technical noise: bias-field offsets, detuning of the squeezing
// transition, pulse detuning, and the detection-noise amplitude.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "squeezemag/random.hpp"

namespace squeezemag {

enum class GenDetuningMode {
    Direct,        // Gaussian with gen_detuning_sigma, independent of the field draw
    FieldDerived,  // field_offset * gen_field_to_detuning
};

struct NoiseConfig {
    double field_sigma_shot = 3e-9;        // T, shot-to-shot
    double field_sigma_longterm = 4.5e-9;  // T, total stability including slow drift
    bool longterm_enabled = false;         // add a per-block offset so the total reaches field_sigma_longterm
    int longterm_block_size = 50;          // shots sharing one drift offset
    double gen_field_to_detuning = 1e8;    // Hz/T (10 Hz/mG)
    double swap_sensitivity_ratio = 140.0;
    double pulse_detuning_sigma = 1.5;  // Hz
    double gen_detuning_sigma = 0.45;   // Hz
    GenDetuningMode gen_mode = GenDetuningMode::Direct;
    double detection_sigma = 4.0;  // atoms per cloud

    void validate() const;
    /// Everything off.
    static NoiseConfig none();
};

/// Quasi-static draws for one shot; every stage of the shot sees the same values.
struct ShotNoise {
    double field_offset = 0.0;     // T, shot-to-shot plus drift block
    double drift_offset = 0.0;     // T, the drift-block part of field_offset
    double gen_detuning = 0.0;     // rad/s
    double pulse_detuning = 0.0;   // rad/s
};

/// Standard deviation of the per-block drift offset, sqrt(L^2 - S^2).
double drift_block_sigma(const NoiseConfig &config);

/// Drift offset shared by every shot of a block (deterministic in seed and block).
double draw_drift_offset(const NoiseConfig &config, std::uint64_t master_seed, std::uint64_t block);

ShotNoise draw_shot_noise(const NoiseConfig &config, Stream &rng, double drift_offset = 0.0);

/// 2 pi S field_offset, in rad/s.
double detuning_during_hold(const NoiseConfig &config, double field_offset, double swap_sensitivity);

/// Warning text when S / gen_field_to_detuning differs from the configured ratio by more than 5%.
std::optional<std::string> check_swap_ratio(const NoiseConfig &config, double swap_sensitivity);

}  // namespace squeezemag
