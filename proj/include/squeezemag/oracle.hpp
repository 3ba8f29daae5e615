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

// Reference computations that share no code with the production propagators.

#pragma once

#include "squeezemag/collective_spin.hpp"

namespace squeezemag {

struct HamiltonianParams {
    double rabi = 0.0;
    double phase = 0.0;
    double delta = 0.0;
    double chi = 0.0;
};

/// Dense exp(-i H t) by Hermitian eigendecomposition, built in the |j, m>
/// basis from sqrt(j(j+1) - m(m+1)). Only for n <= 10.
CollectiveState brute_force_oracle(const CollectiveState &initial, const HamiltonianParams &h, double t);

/// Closed-form one-axis-twisting moments for a coherent state on the equator
/// evolved under chi Jz^2 for time t (no detuning).
struct TwistingMoments {
    double mean_length;   // (N/2) cos^{N-1}(chi t)
    double min_variance;  // smallest variance in the plane normal to the mean spin
    double max_variance;
};

TwistingMoments twisting_closed_form(int n_atoms, double chi, double t);

}  // namespace squeezemag
