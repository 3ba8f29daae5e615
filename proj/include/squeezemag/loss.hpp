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

// Atom loss during twisting, unravelled into quantum-jump trajectories.
//
// Between jumps the non-Hermitian drift exp(-i(H - i/2 sum L^dag L) t) is
// diagonal in the Dicke basis, so it is applied exactly; jump times come from
// thinning a Poisson process whose rate bounds the current total jump rate.
// A jump lowers the atom number by 1 or 2 and chi, delta follow the new N.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "squeezemag/collective_spin.hpp"
#include "squeezemag/lattice.hpp"
#include "squeezemag/random.hpp"

namespace squeezemag {

enum class LossPolicy {
    /// One-body loss at 1/feshbach_timescale on both modes plus |b> pair loss.
    SymmetricOneBody,
    /// One-body loss at 1/feshbach_timescale from |b> only plus |b> pair loss.
    BOnlyOneBody,
};

struct LossConfig {
    bool enabled = false;
    double two_body_relax_timescale = 0.200;  // s, |b> pairs
    double feshbach_timescale = 0.110;        // s
    LossPolicy policy = LossPolicy::SymmetricOneBody;
    /// Atom number at which the pair channel reproduces the configured
    /// timescale, with half of the atoms in |b>.
    int pair_reference_atoms = 500;
    int n_trajectories = 500;

    void validate() const;
};

/// Per-atom and per-pair rate constants in 1/s.
struct LossRates {
    double gamma_a = 0.0;
    double gamma_b = 0.0;
    double kappa_bb = 0.0;  // jump rate kappa * n_b (n_b - 1), two atoms per jump
};

LossRates loss_rates(const LossConfig &config);

enum class LossChannel { OneBodyA = 0, OneBodyB = 1, PairB = 2 };

struct JumpEvent {
    double time = 0.0;
    LossChannel channel = LossChannel::OneBodyA;
    int n_after = 0;
};

/// N-dependent twisting parameters.
struct TwistingLaw {
    std::function<double(int)> chi;
    std::function<double(int)> delta;
};

TwistingLaw twisting_law(const LatticeConfig &config, double extra_delta = 0.0);

/// One trajectory segment of duration t. `events` (optional) receives the jumps.
CollectiveState evolve_trajectory(const CollectiveState &state, const TwistingLaw &law, const LossRates &rates,
                                  double t, Stream &rng, std::vector<JumpEvent> *events = nullptr);

/// One row of a loss scan.
struct LossScanPoint {
    double t = 0.0;
    double squeezing_db = 0.0;  // metrological: N Var_min / |<J>|^2
    double number_squeezing_db = 0.0;  // 4 Var_min / N
    double mean_spin = 0.0;     // |<J>| / (N/2), N the mean atom number
    double n_mean = 0.0;
    double stderr_db = 0.0;     // batch-means error of squeezing_db
};

struct LossScanOptions {
    int n_trajectories = 500;
    int n_batches = 10;
    int workers = 1;
    std::uint64_t seed = 0;
};

/// Trajectory ensemble starting from `initial`, moments recorded at every
/// time in `times` (ascending, >= 0).
std::vector<LossScanPoint> evolve_with_loss(const CollectiveState &initial, const TwistingLaw &law,
                                            const LossConfig &loss, const std::vector<double> &times,
                                            const LossScanOptions &options);

}  // namespace squeezemag
