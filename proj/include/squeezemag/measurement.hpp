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

#pragma once

#include <cstdint>
#include <vector>

#include "squeezemag/collective_spin.hpp"
#include "squeezemag/lattice.hpp"
#include "squeezemag/noise.hpp"

namespace squeezemag {

struct SiteCounts {
    int n_a_true = 0;
    int n_b_true = 0;
    double n_a_det = 0.0;
    double n_b_det = 0.0;
};

struct ShotRecord {
    std::uint64_t run_id = 0;
    std::int64_t shot_index = 0;
    std::vector<SiteCounts> sites;
    ShotNoise noise;  // echoed for auditing

    std::vector<SitePopulation> detected() const;
    std::vector<SitePopulation> truth() const;
};

/// Samples every site and adds Gaussian detection noise to each cloud.
ShotRecord measure_shot(const std::vector<CollectiveState> &final_states, const NoiseConfig &config, Stream &rng);

struct ImbalanceView {
    std::vector<double> z;  // per region, from detected populations
    double dz = 0.0;        // z[0] - z[1] when there are two regions
};

/// z = (N_b - N_a) / (N_b + N_a) of a population; throws DegenerateInput on zero total.
double imbalance(const SitePopulation &p);

ImbalanceView imbalances(const ShotRecord &shot, const RegionSpec &regions);

}  // namespace squeezemag
