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

// Squeezing parameters, fringe and noise fits, and the shot bootstrap.
//
// All estimators work on detected populations. Detection noise is removed by
// subtracting its variance: per cloud detection_sigma^2, two clouds per site.
// Subtracted variances can go negative; they are reported as they are and
// flagged, never clamped.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "squeezemag/lattice.hpp"
#include "squeezemag/measurement.hpp"
#include "squeezemag/random.hpp"

namespace squeezemag {

struct EstimateResult {
    std::string estimator;
    double value = 0.0;
    double std_error = 0.0;  // standard deviation of the bootstrap resamples
    double ci_low = 0.0;     // value - std_error
    double ci_high = 0.0;    // value + std_error
    int n_shots = 0;
    int n_resamples = 0;
    bool negative_variance = false;
    std::string resampling = "bootstrap";
};

struct BootstrapOptions {
    int n_resamples = 1000;
    std::uint64_t seed = 0;
    int workers = 1;
};

/// Nonparametric bootstrap over n_items: `statistic` is evaluated on the full
/// index set and on n_resamples resamples drawn with replacement. Resample r
/// uses substream(seed, Bootstrap, {r}), so the result does not depend on
/// the worker count.
EstimateResult bootstrap(const std::function<double(const std::vector<std::size_t> &)> &statistic, std::size_t n_items,
                         const BootstrapOptions &options, const std::string &name = "bootstrap");

/// Same, with the seed drawn from `rng`.
EstimateResult bootstrap(const std::function<double(const std::vector<std::size_t> &)> &statistic, std::size_t n_items,
                         int n_resamples, Stream &rng, const std::string &name = "bootstrap");

/// Per-shot summed (N_a, N_b) of one region; the input of the point estimators below.
std::vector<SitePopulation> region_series(const std::vector<ShotRecord> &shots, const Region &region);

/// (Var(N_b - N_a) - det_variance) / (4 p (1 - p) N_tot) over the given shots.
double xi2_direct_value(const std::vector<SitePopulation> &series, const std::vector<std::size_t> &idx,
                        double det_variance);

/// Relative squeezing of two regions with the classical reference c1/N1 + c2/N2.
double xi2_rel_value(const std::vector<SitePopulation> &left, const std::vector<SitePopulation> &right,
                     const std::vector<std::size_t> &idx, double det_sigma_left2, double det_sigma_right2);

/// N_tot / 4 * Var(dz) (the equal-halves, zero-imbalance form), without noise subtraction.
double xi2_rel_simplified_value(const std::vector<SitePopulation> &left, const std::vector<SitePopulation> &right,
                                const std::vector<std::size_t> &idx);

/// Number squeezing of the summed region with bootstrap CI.
EstimateResult xi2_direct(const std::vector<ShotRecord> &shots, const Region &region, double detection_sigma,
                          const BootstrapOptions &options = {});

/// Relative squeezing of two regions with bootstrap CI.
EstimateResult xi2_rel(const std::vector<ShotRecord> &shots, const Region &left, const Region &right,
                       double detection_sigma, const BootstrapOptions &options = {});

/// xi2_N / V^2.
double xi2_metrological(double xi2_n, double visibility);

struct FringeFit {
    double visibility = 0.0;
    double phase_offset = 0.0;  // z = V sin(Phi + phase_offset) + offset
    double offset = 0.0;
    double visibility_err = 0.0;
    double phase_offset_err = 0.0;
    double offset_err = 0.0;
    double residual_std = 0.0;
    double r_squared = 0.0;
};

/// Least squares z = A sin(Phi) + B cos(Phi) + C.
FringeFit fit_fringe(const std::vector<double> &phases, const std::vector<double> &imbalances);

struct QuadraticNoiseFit {
    double beta2 = 0.0;        // coefficient of N^2
    double linear_term = 0.0;  // coefficient of N
    double beta2_err = 0.0;
    double linear_err = 0.0;
};

/// Least squares Var = a N + beta2 N^2 (no constant term).
QuadraticNoiseFit fit_quadratic_noise(const std::vector<double> &ensemble_sizes, const std::vector<double> &variances);

/// One point of the variance-vs-size curve used by fit_quadratic_noise.
struct VariancePoint {
    double target = 0.0;
    double n_mean = 0.0;    // mean detected atom number over subsets and shots
    double variance = 0.0;  // subset-averaged Var(N_b - N_a), detection noise subtracted
    std::size_t n_subsets = 0;
};

/// For each target atom number, averages Var(N_b - N_a) over all site subsets
/// whose summed atom number lies within the band (or a seeded sample of them).
std::vector<VariancePoint> combination_variance_curve(const std::vector<ShotRecord> &shots,
                                                      const std::vector<SiteParams> &sites,
                                                      const std::vector<long> &targets, double detection_sigma,
                                                      const CombinationOptions &options, Stream &rng);

/// Sample mean and unbiased sample variance of x[idx].
double sample_mean(const std::vector<double> &x, const std::vector<std::size_t> &idx);
double sample_variance(const std::vector<double> &x, const std::vector<std::size_t> &idx);

/// 0..n-1.
std::vector<std::size_t> all_indices(std::size_t n);

}  // namespace squeezemag
