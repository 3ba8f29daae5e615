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

#include "squeezemag/noise.hpp"

#include <cmath>
#include <sstream>

#include "squeezemag/error.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

void NoiseConfig::validate() const {
    auto nonneg = [](double v, const char *name) {
        if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument(std::string("noise.") + name + " must be >= 0");
    };
    nonneg(field_sigma_shot, "field_sigma_shot");
    nonneg(field_sigma_longterm, "field_sigma_longterm");
    nonneg(gen_field_to_detuning, "gen_field_to_detuning");
    nonneg(swap_sensitivity_ratio, "swap_sensitivity_ratio");
    nonneg(pulse_detuning_sigma, "pulse_detuning_sigma");
    nonneg(gen_detuning_sigma, "gen_detuning_sigma");
    nonneg(detection_sigma, "detection_sigma");
    if (longterm_block_size < 1) throw InvalidArgument("noise.longterm_block_size must be >= 1");
}

NoiseConfig NoiseConfig::none() {
    NoiseConfig c;
    c.field_sigma_shot = 0.0;
    c.field_sigma_longterm = 0.0;
    c.longterm_enabled = false;
    c.pulse_detuning_sigma = 0.0;
    c.gen_detuning_sigma = 0.0;
    c.detection_sigma = 0.0;
    return c;
}

double drift_block_sigma(const NoiseConfig &config) {
    if (!config.longterm_enabled) return 0.0;
    const double l = config.field_sigma_longterm, s = config.field_sigma_shot;
    return l > s ? std::sqrt(l * l - s * s) : 0.0;
}

double draw_drift_offset(const NoiseConfig &config, std::uint64_t master_seed, std::uint64_t block) {
    const double sigma = drift_block_sigma(config);
    if (sigma == 0.0) return 0.0;
    Stream rng = substream(master_seed, StreamPurpose::LongTermDrift, {block});
    return sigma * rng.normal();
}

ShotNoise draw_shot_noise(const NoiseConfig &config, Stream &rng, double drift_offset) {
    // Always consume the same number of draws so that switching one source
    // off does not reshuffle the others.
    const double z_field = rng.normal();
    const double z_gen = rng.normal();
    const double z_pulse = rng.normal();
    ShotNoise out;
    out.drift_offset = drift_offset;
    out.field_offset = config.field_sigma_shot * z_field + drift_offset;
    if (config.gen_mode == GenDetuningMode::FieldDerived) {
        out.gen_detuning = units::kTwoPi * config.gen_field_to_detuning * out.field_offset;
    } else {
        out.gen_detuning = units::kTwoPi * config.gen_detuning_sigma * z_gen;
    }
    out.pulse_detuning = units::kTwoPi * config.pulse_detuning_sigma * z_pulse;
    return out;
}

double detuning_during_hold(const NoiseConfig &config, double field_offset, double swap_sensitivity) {
    (void)config;
    if (!(swap_sensitivity > 0)) throw InvalidArgument("swap sensitivity must be > 0");
    return units::kTwoPi * swap_sensitivity * field_offset;
}

std::optional<std::string> check_swap_ratio(const NoiseConfig &config, double swap_sensitivity) {
    if (config.gen_field_to_detuning <= 0 || config.swap_sensitivity_ratio <= 0) return std::nullopt;
    const double ratio = swap_sensitivity / config.gen_field_to_detuning;
    if (std::abs(ratio / config.swap_sensitivity_ratio - 1.0) <= 0.05) return std::nullopt;
    std::ostringstream msg;
    msg << "swap sensitivity / generation sensitivity = " << ratio << ", configured ratio is "
        << config.swap_sensitivity_ratio;
    return msg.str();
}

}  // namespace squeezemag
