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

// Field and gradient estimates from Ramsey imbalances.
//
// Sign conventions: the ideal fringe of a region is z = V cos(phi + Phi) with
// phi = 2 pi (S B + delta_swap) t_int the accumulated phase and Phi the lab
// phase of the final pi/2 pulse. At the working point Phi = -pi/2 - phi_mean
// the fringe reads z = V sin(phi - phi_mean), so dz = z_left - z_right grows
// with B_left - B_right. Baselines run from the left to the right centroid
// and gradients are (B_right - B_left) / baseline.

#pragma once

#include <string>
#include <vector>

#include "squeezemag/estimators.hpp"
#include "squeezemag/pipeline.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

struct FieldProtocolParams {
    double swap_sensitivity = units::default_swap_sensitivity();  // S, Hz/T
    double bias_field = units::kBiasField;                        // T
    double t_hold = 1e-6;                                         // s
    double t_pi = units::kSwapPiTime;                             // s
    double visibility = 1.0;

    double t_int() const { return t_hold + 2.0 * t_pi; }
    /// Throws InvalidArgument.
    void validate() const;
};

/// Field difference from a working-point fringe amplitude:
/// 2 asin(dz / 2V) / (2 pi S t_int). Throws OutOfRange for |dz| > 2V.
double delta_b(double dz_max, const FieldProtocolParams &p);

/// Single-shot field sensitivity of the differential readout,
/// std_dz / (2 * 2 pi V S t_int). With this normalisation sigma_B / sql() at
/// equal V equals std_dz sqrt(N) / 2, the relative squeezing amplitude.
double sensitivity(double std_dz, const FieldProtocolParams &p);

/// Error of a field difference, std_dz / (2 pi V S t_int); twice sensitivity().
double differential_sensitivity(double std_dz, const FieldProtocolParams &p);

/// 1 / (2 pi V S t_int sqrt(n_tot)).
double sql(double n_tot, const FieldProtocolParams &p);

/// Two regions of a classical (binomial) state with Gaussian detection noise.
struct DetectionBudget {
    double n_left = 0.0;
    double n_right = 0.0;
    int clouds_left = 0;  // two per site
    int clouds_right = 0;
    double detection_sigma = 0.0;

    /// Var(dz) = 1/N_L + 1/N_R + clouds_L sigma^2 / N_L^2 + clouds_R sigma^2 / N_R^2.
    double classical_dz_variance() const;
};

/// Same normalisation as sensitivity(), applied to the classical Var(dz);
/// equals sql() when detection noise is zero and the halves are equal.
double sql_with_detection(const DetectionBudget &budget, const FieldProtocolParams &p);

/// -2V sin(dphi/2) cos(dphi/2 + phi_left).
double working_point_dz(double phi_left, double dphi, double visibility);

/// Readout phase putting the fringe of mean phase phi_mean on its zero crossing.
double working_point_phase(double phi_mean);

/// 2 pi (S field + swap_detuning_hz) t_int.
double accumulated_phase(double field, double swap_detuning_hz, const FieldProtocolParams &p);

struct GradiometerGeometry {
    double baseline_um = 0.0;

    void validate() const;
    /// Centroid separation of two regions.
    static GradiometerGeometry from_regions(const std::vector<SiteParams> &sites, const Region &left,
                                            const Region &right);
};

/// delta_b / baseline, in T/um.
double gradient_estimate(double delta_b, const GradiometerGeometry &geometry);

/// sigma_B sqrt(cycle_time), in T/sqrt(Hz).
double duty_cycle_sensitivity(double sigma_b, double cycle_time);

// ---------------------------------------------------------------------------
// Pipeline analyses.

/// Noise-free, loss-free fringe of a region: z(Phi) = visibility cos(phase + Phi).
struct FringeCalibration {
    double phase = 0.0;
    double visibility = 0.0;
};

/// Ramsey sequence with a placeholder readout phase; the tail starts at SwapOut.
Sequence ramsey_with_phase(double t_hold, double readout_phase, const RamseyOptions &options);

FringeCalibration calibrate_fringe(const RunConfig &config, double t_hold, const Region &region,
                                   const RamseyOptions &options);

struct RamseyScanOptions {
    std::vector<double> t_hold;
    RamseyOptions ramsey;
    /// Regions of the differential readout; empty means the lattice halves.
    Region left;
    Region right;
    /// Fringe phases cycled over the shots (round robin); >= 4.
    int fringe_phases = 8;
    BootstrapOptions bootstrap{200, 0, 1};
};

/// One hold time of a Ramsey scan.
struct RamseyPoint {
    double t_hold = 0.0;
    double t_int = 0.0;
    double readout_phase = 0.0;     // working point, lab radians
    double calibrated_visibility = 0.0;
    FringeFit mean_fringe;          // full ensemble, shots as taken
    FringeFit single_shot_fringe;   // full ensemble, phases re-referenced by each shot's field noise
    std::vector<ShotRecord> working_point;
    std::vector<ShotRecord> fringe;
    std::vector<double> fringe_phases;  // readout phase of each fringe record
};

struct RamseyScan {
    std::vector<SiteParams> sites;
    Region left;
    Region right;
    std::vector<RamseyPoint> points;
};

/// Shares one generation per shot across all hold times. Every shot runs the
/// working-point readout of each hold time plus one fringe phase per hold time.
RamseyScan ramsey_scan(const RunConfig &config, const RamseyScanOptions &options);

/// Expected imbalance 2 sum <Jz> / sum N of a region of states.
double expected_imbalance(const std::vector<CollectiveState> &states, const Region &region);

/// Ensemble imbalance of each record.
std::vector<double> ensemble_imbalance(const std::vector<ShotRecord> &shots, const Region &region);

/// dz = z_left - z_right of each record.
std::vector<double> differential_imbalance(const std::vector<ShotRecord> &shots, const Region &left,
                                           const Region &right);

/// A row of a sensitivity table. Field quantities in T (gradients in T/um).
struct ScanRow {
    double x_value = 0.0;
    double sigma_b = 0.0;
    double ci = 0.0;
    double sql = 0.0;      // V = 1, no detection noise
    double sql_det = 0.0;  // V = 1, with detection noise
    double enhancement = 0.0;  // 1 - sigma_b / sql
    double visibility_mean = 0.0;
    double visibility_single = 0.0;
    double std_dz = 0.0;
    double n_tot = 0.0;
};

/// sigma_B against t_int (x_value in s), with the mean visibility of each
/// point's fringe. CI from the bootstrap of std(dz).
std::vector<ScanRow> sensitivity_table(const RamseyScan &scan, const FieldProtocolParams &base, double detection_sigma,
                                       const BootstrapOptions &boot);

/// Runs ramsey_scan and tabulates it.
std::vector<ScanRow> sensitivity_scan(const RunConfig &config, const RamseyScanOptions &options);

/// Gradient recovered at one hold time.
struct GradientEstimate {
    double t_int = 0.0;
    double mean_dz = 0.0;
    double mean_dz_err = 0.0;
    double delta_b = 0.0;   // B_right - B_left, T
    double gradient = 0.0;  // T/um
    double gradient_err = 0.0;
    double baseline_um = 0.0;
    double visibility = 0.0;
};

std::vector<GradientEstimate> gradient_estimates(const RamseyScan &scan, const FieldProtocolParams &base,
                                                 const BootstrapOptions &boot);

/// Gradient from the growth of the differential phase with t_int: each
/// point's dz is inverted to 2 asin(dz / 2V), a weighted straight line with
/// intercept is fitted against t_int, and the slope is divided by 2 pi S
/// and the baseline. The intercept absorbs static per-site phase offsets.
struct GradientFit {
    double gradient = 0.0;  // T/um
    double gradient_err = 0.0;
    double intercept = 0.0;  // rad
    double r_squared = 0.0;
    double baseline_um = 0.0;
};

GradientFit gradient_from_slope(const std::vector<GradientEstimate> &points, double swap_sensitivity);

/// Least-squares line y = a + b x with optional weights (1/sigma^2); returns {a, b, b_err, r2}.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_err = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &sigma = {});

/// Straight line through the origin; returns slope and R^2 about the origin.
LineFit fit_line_through_origin(const std::vector<double> &x, const std::vector<double> &y);

/// Gradient sensitivity of one region pair.
struct GradientRow {
    std::string label;
    int window = 0;
    double baseline_um = 0.0;
    double sigma_grad = 0.0;  // T/um
    double ci = 0.0;
    double sql_grad = 0.0;  // T/um, binomial halves with V = 1
    double enhancement = 0.0;
    double xi2_rel_raw = 0.0;  // no detection-noise subtraction
    double n_tot = 0.0;
};

/// Gradient sensitivity of the pair (left, right) from working-point shots.
GradientRow gradient_row(const std::vector<ShotRecord> &shots, const std::vector<SiteParams> &sites, const Region &left,
                         const Region &right, const FieldProtocolParams &params, const BootstrapOptions &boot);

/// Outer windows of w sites on each edge, w = 1..max_window (max_window <= n_sites / 2).
std::vector<GradientRow> gradiometric_summing_gain(const std::vector<ShotRecord> &shots,
                                                   const std::vector<SiteParams> &sites, int max_window,
                                                   const FieldProtocolParams &params,
                                                   const BootstrapOptions &boot);

/// Single-site pairs (i, n - 1 - i), i = 0..n/2 - 1.
std::vector<GradientRow> single_well_pairs(const std::vector<ShotRecord> &shots, const std::vector<SiteParams> &sites,
                                           const FieldProtocolParams &params, const BootstrapOptions &boot);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace squeezemag
