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

#include "squeezemag/measurement.hpp"

#include <cmath>

#include "squeezemag/error.hpp"

namespace squeezemag {

std::vector<SitePopulation> ShotRecord::detected() const {
    std::vector<SitePopulation> out(sites.size());
    for (size_t i = 0; i < sites.size(); ++i) out[i] = {sites[i].n_a_det, sites[i].n_b_det};
    return out;
}

std::vector<SitePopulation> ShotRecord::truth() const {
    std::vector<SitePopulation> out(sites.size());
    for (size_t i = 0; i < sites.size(); ++i) {
        out[i] = {static_cast<double>(sites[i].n_a_true), static_cast<double>(sites[i].n_b_true)};
    }
    return out;
}

ShotRecord measure_shot(const std::vector<CollectiveState> &final_states, const NoiseConfig &config, Stream &rng) {
    ShotRecord rec;
    rec.sites.reserve(final_states.size());
    for (const auto &state : final_states) {
        const double m = sample_jz(state, rng);
        const int n = state.n_atoms();
        SiteCounts c;
        c.n_b_true = static_cast<int>(std::lround(0.5 * n + m));
        c.n_a_true = n - c.n_b_true;
        const double za = rng.normal();
        const double zb = rng.normal();
        c.n_a_det = c.n_a_true + config.detection_sigma * za;
        c.n_b_det = c.n_b_true + config.detection_sigma * zb;
        rec.sites.push_back(c);
    }
    return rec;
}

double imbalance(const SitePopulation &p) {
    const double total = p.n_a + p.n_b;
    if (total == 0.0 || !std::isfinite(total)) throw DegenerateInput("imbalance: zero total population");
    return (p.n_b - p.n_a) / total;
}

ImbalanceView imbalances(const ShotRecord &shot, const RegionSpec &regions) {
    const auto pops = sum_region(shot.detected(), regions);
    ImbalanceView view;
    for (const auto &p : pops) view.z.push_back(imbalance(p));
    if (view.z.size() == 2) view.dz = view.z[0] - view.z[1];
    return view;
}

}  // namespace squeezemag
