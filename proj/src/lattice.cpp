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

#include "squeezemag/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "squeezemag/error.hpp"

namespace squeezemag {

void LatticeConfig::validate() const {
    if (n_sites < 1 || n_sites > 30) throw InvalidArgument("lattice.n_sites must be in [1, 30]");
    if (!(spacing_um > 0)) throw InvalidArgument("lattice.spacing_um must be > 0");
    if (!(chi_ref > 0)) throw InvalidArgument("lattice.chi_ref must be > 0");
    if (!std::isfinite(delta0) || !std::isfinite(delta_slope)) throw InvalidArgument("lattice detuning must be finite");
    const auto &law = atom_number_law;
    switch (law.kind) {
        case AtomNumberLaw::Kind::Uniform:
        case AtomNumberLaw::Kind::StratifiedUniform:
            if (law.min < 1 || law.max < law.min) throw InvalidArgument("atom_number_law: empty range");
            break;
        case AtomNumberLaw::Kind::Constant:
            if (law.min < 1) throw InvalidArgument("atom_number_law: constant must be >= 1");
            break;
        case AtomNumberLaw::Kind::Fixed:
            if (static_cast<int>(law.values.size()) != n_sites) {
                throw InvalidArgument("atom_number_law: fixed values must list one entry per site");
            }
            for (int v : law.values)
                if (v < 1) throw InvalidArgument("atom_number_law: fixed values must be >= 1");
            break;
    }
}

double chi_of_n(const LatticeConfig &config, int n_atoms) {
    if (n_atoms < 1) throw InvalidArgument("chi_of_n: n_atoms must be >= 1");
    if (n_atoms == units::kReferenceAtoms) return config.chi_ref;
    return config.chi_ref * std::sqrt(static_cast<double>(units::kReferenceAtoms) / n_atoms);
}

double delta_of_n(const LatticeConfig &config, int n_atoms) {
    return config.delta0 + config.delta_slope * (n_atoms - units::kReferenceAtoms);
}

std::vector<SiteParams> build_lattice(const LatticeConfig &config, Stream &rng) {
    config.validate();
    const auto &law = config.atom_number_law;
    std::vector<int> counts(config.n_sites);
    switch (law.kind) {
        case AtomNumberLaw::Kind::Uniform:
            for (auto &c : counts) c = law.min + static_cast<int>(rng.below(static_cast<std::uint64_t>(law.max - law.min + 1)));
            break;
        case AtomNumberLaw::Kind::StratifiedUniform: {
            const double span = law.max - law.min;
            for (int i = 0; i < config.n_sites; ++i) {
                counts[i] = law.min + static_cast<int>(std::lround(span * (i + 0.5) / config.n_sites));
            }
            for (int i = config.n_sites - 1; i > 0; --i) {
                const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
                std::swap(counts[i], counts[j]);
            }
            break;
        }
        case AtomNumberLaw::Kind::Constant:
            std::fill(counts.begin(), counts.end(), law.min);
            break;
        case AtomNumberLaw::Kind::Fixed:
            counts = law.values;
            break;
    }
    std::vector<SiteParams> sites(config.n_sites);
    for (int i = 0; i < config.n_sites; ++i) {
        auto &s = sites[i];
        s.site_index = i;
        s.n_atoms = counts[i];
        s.chi = chi_of_n(config, counts[i]);
        s.delta_offset = delta_of_n(config, counts[i]);
        s.position_um = i * config.spacing_um;
    }
    return sites;
}

void RegionSpec::validate(int n_sites) const {
    std::set<int> seen;
    for (const auto &r : regions) {
        for (int idx : r) {
            if (idx < 0 || idx >= n_sites) {
                throw InvalidArgument("region index " + std::to_string(idx) + " outside [0, " + std::to_string(n_sites) + ")");
            }
            if (!seen.insert(idx).second) throw InvalidArgument("regions overlap at site " + std::to_string(idx));
        }
    }
}

SitePopulation sum_region(const std::vector<SitePopulation> &sites, const Region &region) {
    SitePopulation out;
    for (int idx : region) {
        if (idx < 0 || idx >= static_cast<int>(sites.size())) {
            throw InvalidArgument("region index " + std::to_string(idx) + " out of range");
        }
        out.n_a += sites[idx].n_a;
        out.n_b += sites[idx].n_b;
    }
    return out;
}

std::vector<SitePopulation> sum_region(const std::vector<SitePopulation> &sites, const RegionSpec &spec) {
    spec.validate(static_cast<int>(sites.size()));
    std::vector<SitePopulation> out;
    out.reserve(spec.regions.size());
    for (const auto &r : spec.regions) out.push_back(sum_region(sites, r));
    return out;
}

RegionSpec split_halves(int n_sites) {
    if (n_sites < 2) throw InvalidArgument("split_halves needs at least two sites");
    RegionSpec spec;
    spec.regions.resize(2);
    const int half = n_sites / 2;
    for (int i = 0; i < n_sites; ++i) spec.regions[i < half ? 0 : 1].push_back(i);
    return spec;
}

double region_centroid(const std::vector<SiteParams> &sites, const Region &region) {
    double w = 0.0, x = 0.0;
    for (int idx : region) {
        const auto &s = sites.at(idx);
        w += s.n_atoms;
        x += s.n_atoms * s.position_um;
    }
    if (w <= 0) throw DegenerateInput("region_centroid: empty region");
    return x / w;
}

// ---------------------------------------------------------------------------
// Subset enumeration by subset-sum counting and unranking.

namespace {

struct SubsetCounter {
    std::vector<int> weights;  // atom numbers, canonical site order
    std::vector<int> ids;      // site indices, same order
    int total = 0;
    // prefix[i][s] = number of subsets of items i..n-1 with sum < s
    std::vector<std::vector<std::uint64_t>> prefix;

    explicit SubsetCounter(const std::vector<SiteParams> &sites) {
        std::vector<SiteParams> sorted = sites;
        std::sort(sorted.begin(), sorted.end(),
                  [](const SiteParams &a, const SiteParams &b) { return a.site_index < b.site_index; });
        for (const auto &s : sorted) {
            weights.push_back(s.n_atoms);
            ids.push_back(s.site_index);
            total += s.n_atoms;
        }
        const int n = static_cast<int>(weights.size());
        std::vector<std::vector<std::uint64_t>> exact(n + 1, std::vector<std::uint64_t>(total + 1, 0));
        exact[n][0] = 1;
        for (int i = n - 1; i >= 0; --i) {
            for (int s = 0; s <= total; ++s) {
                std::uint64_t v = exact[i + 1][s];
                if (s >= weights[i]) v += exact[i + 1][s - weights[i]];
                exact[i][s] = v;
            }
        }
        prefix.assign(n + 1, std::vector<std::uint64_t>(total + 2, 0));
        for (int i = 0; i <= n; ++i)
            for (int s = 0; s <= total; ++s) prefix[i][s + 1] = prefix[i][s] + exact[i][s];
    }

    // Subsets of items i.. with sum in [lo, hi].
    std::uint64_t count(int i, long lo, long hi) const {
        lo = std::max(lo, 0L);
        hi = std::min(hi, static_cast<long>(total));
        if (lo > hi) return 0;
        return prefix[i][hi + 1] - prefix[i][lo];
    }

    Region unrank(std::uint64_t rank, long lo, long hi) const {
        Region out;
        const int n = static_cast<int>(weights.size());
        for (int i = 0; i < n; ++i) {
            const std::uint64_t without = count(i + 1, lo, hi);
            if (rank < without) continue;
            rank -= without;
            out.push_back(ids[i]);
            lo -= weights[i];
            hi -= weights[i];
        }
        return out;
    }
};

std::pair<long, long> band_limits(long target, double band) {
    const long lo = static_cast<long>(std::ceil(target * (1.0 - band) - 1e-9));
    const long hi = static_cast<long>(std::floor(target * (1.0 + band) + 1e-9));
    return {lo, hi};
}

}  // namespace

std::uint64_t count_combinations(const std::vector<SiteParams> &sites, long target_mean_atoms, double band) {
    if (sites.empty()) return 0;
    SubsetCounter counter(sites);
    auto [lo, hi] = band_limits(target_mean_atoms, band);
    lo = std::max(lo, 1L);  // the empty subset never qualifies
    return counter.count(0, lo, hi);
}

std::vector<Region> enumerate_combinations(const std::vector<SiteParams> &sites, long target_mean_atoms,
                                           const CombinationOptions &options, Stream &rng) {
    if (options.band < 0) throw InvalidArgument("combination band must be >= 0");
    if (options.max_subsets == 0) throw InvalidArgument("max_subsets must be >= 1");
    if (sites.empty()) return {};
    SubsetCounter counter(sites);
    auto [lo, hi] = band_limits(target_mean_atoms, options.band);
    lo = std::max(lo, 1L);
    const std::uint64_t total = counter.count(0, lo, hi);
    std::vector<std::uint64_t> ranks;
    if (total <= options.max_subsets) {
        ranks.resize(total);
        for (std::uint64_t r = 0; r < total; ++r) ranks[r] = r;
    } else {
        // Floyd's algorithm: k distinct ranks, uniform over all k-subsets of [0, total).
        std::set<std::uint64_t> chosen;
        const std::uint64_t k = options.max_subsets;
        for (std::uint64_t j = total - k; j < total; ++j) {
            const std::uint64_t t = rng.below(j + 1);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        ranks.assign(chosen.begin(), chosen.end());
    }
    std::vector<Region> out;
    out.reserve(ranks.size());
    for (auto r : ranks) out.push_back(counter.unrank(r, lo, hi));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace squeezemag
