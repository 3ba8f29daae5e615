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
#include <string>
#include <utility>
#include <vector>

#include "squeezemag/random.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

/// How per-site atom numbers are drawn.
struct AtomNumberLaw {
    enum class Kind {
        Uniform,            // independent uniform integers on [min, max]
        StratifiedUniform,  // evenly spaced quantiles of [min, max], randomly permuted
        Constant,           // every site gets `min`
        Fixed,              // explicit per-site list
    };
    Kind kind = Kind::Uniform;
    int min = 300;
    int max = 600;
    std::vector<int> values;
};

struct LatticeConfig {
    int n_sites = 25;
    AtomNumberLaw atom_number_law;
    double chi_ref = units::kChiAt500;  // rad/s at N = 500
    double delta0 = 0.0;                // rad/s
    double delta_slope = units::kDeltaSlope;
    double spacing_um = units::kLatticeSpacingUm;

    /// Throws InvalidArgument.
    void validate() const;
};

struct SiteParams {
    int site_index = 0;
    int n_atoms = 0;
    double chi = 0.0;           // rad/s
    double delta_offset = 0.0;  // rad/s
    double position_um = 0.0;
};

/// chi(N) = chi_ref sqrt(500 / N).
double chi_of_n(const LatticeConfig &config, int n_atoms);
/// delta(N) = delta0 + slope (N - 500).
double delta_of_n(const LatticeConfig &config, int n_atoms);

std::vector<SiteParams> build_lattice(const LatticeConfig &config, Stream &rng);

/// Per-site (N_a, N_b) populations of one shot.
struct SitePopulation {
    double n_a = 0.0;
    double n_b = 0.0;
};

/// One summing region is a set of site indices; a RegionSpec holds several disjoint ones.
using Region = std::vector<int>;
struct RegionSpec {
    std::vector<Region> regions;
    /// Throws InvalidArgument on overlap or indices outside [0, n_sites).
    void validate(int n_sites) const;
};

/// Component-wise sums for each region.
std::vector<SitePopulation> sum_region(const std::vector<SitePopulation> &sites, const RegionSpec &spec);
SitePopulation sum_region(const std::vector<SitePopulation> &sites, const Region &region);

/// Left / right halves of n sites (the odd middle site goes to the right).
RegionSpec split_halves(int n_sites);
/// Atom-weighted centroid of a region in micrometres.
double region_centroid(const std::vector<SiteParams> &sites, const Region &region);

struct CombinationOptions {
    double band = 0.02;  // relative tolerance around the target
    std::size_t max_subsets = 500;
};

/// Subsets whose summed atom number lies in target (1 +- band). If there are
/// more than max_subsets, a seeded uniform sample without replacement is
/// returned. Subsets are sorted lists of site indices; the output is sorted.
std::vector<Region> enumerate_combinations(const std::vector<SiteParams> &sites, long target_mean_atoms,
                                           const CombinationOptions &options, Stream &rng);

/// Number of qualifying subsets (saturates at UINT64_MAX).
std::uint64_t count_combinations(const std::vector<SiteParams> &sites, long target_mean_atoms, double band);

}  // namespace squeezemag
