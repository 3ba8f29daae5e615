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

// Monte Carlo shots over the whole lattice.
//
// Every random draw of a run comes from a counter-based substream of the
// master seed: the lattice from (Lattice), shot noise from (ShotNoise, shot),
// drift blocks from (LongTermDrift, block), loss trajectories from
// (Loss, shot, site) and readout from (Measurement, shot, variant). Shots are
// independent, so any worker count gives the same records.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "squeezemag/lattice.hpp"
#include "squeezemag/loss.hpp"
#include "squeezemag/measurement.hpp"
#include "squeezemag/noise.hpp"
#include "squeezemag/sequence.hpp"

namespace squeezemag {

struct RunConfig {
    LatticeConfig lattice;
    Sequence sequence;
    NoiseConfig noise;
    LossConfig loss;
    ProtocolParams protocol;
    int n_shots = 100;
    std::uint64_t master_seed = 1;
    std::uint64_t run_id = 0;
    int workers = 1;
    std::string output_dir;
    /// Replace the tomography readout angle by the calibrated optimum.
    bool calibrate_readout = false;

    /// Throws InvalidArgument.
    void validate() const;
};

std::vector<SiteParams> run_lattice(const RunConfig &config);

ShotNoise shot_noise_for(const RunConfig &config, std::int64_t shot);

struct ShotBatch {
    std::vector<SiteParams> sites;
    /// records[v]: the shots read out with tail v, in shot order.
    std::vector<std::vector<ShotRecord>> records;
};

/// True when every shot evolves identically (no technical noise, no loss);
/// run_shots then evolves once and only the readout draws differ.
bool shot_invariant(const RunConfig &config);

/// Which tails a shot runs; null means all of them.
using TailSelector = std::function<bool(std::size_t shot, std::size_t tail)>;

/// Round robin: shot s runs tail s mod n_tails only.
TailSelector round_robin(std::size_t n_tails);

/// Runs `prefix` once per shot and site, then each selected tail on the
/// resulting state. All tails of a shot share the prefix state and noise
/// draw; their measurement draws are independent.
ShotBatch run_shots(const RunConfig &config, const Sequence &prefix, const std::vector<Sequence> &tails,
                    const TailSelector &select = {});

/// The plain run: config.sequence for every shot.
ShotBatch simulate(const RunConfig &config);

/// Splits a sequence into steps [0, index) and [index, end).
std::pair<Sequence, Sequence> split_sequence(const Sequence &seq, std::size_t index);

/// Index of the first SwapOut, else of the Readout, else the size.
std::size_t tail_start(const Sequence &seq);

/// Tomography angle in (-pi/2, pi/2] minimising the summed per-site variance
/// of the measured component after `generation`, from noise-free, loss-free
/// states. The readout rotation is treated as ideal for the search.
double calibrate_tomography_angle(const RunConfig &config, const Sequence &generation);

/// Per-site noise-free states after `seq` (no loss, no shot noise).
std::vector<CollectiveState> noiseless_states(const RunConfig &config, const Sequence &seq);

}  // namespace squeezemag
