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

#include "squeezemag/magnetometry.hpp"

#include <algorithm>
#include <cmath>

#include "squeezemag/error.hpp"

namespace squeezemag {

using units::kPi;
using units::kTwoPi;

void FieldProtocolParams::validate() const {
    if (!(swap_sensitivity > 0) || !std::isfinite(swap_sensitivity)) throw InvalidArgument("S must be > 0");
    if (!(t_hold >= 0) || !(t_pi >= 0) || !std::isfinite(t_hold) || !std::isfinite(t_pi)) {
        throw InvalidArgument("t_hold and t_pi must be finite and >= 0");
    }
    if (!(t_int() > 0)) throw InvalidArgument("t_int must be > 0");
    if (!(visibility > 0) || visibility > 1.0) throw InvalidArgument("visibility must lie in (0, 1]");
}

double delta_b(double dz_max, const FieldProtocolParams &p) {
    p.validate();
    if (!std::isfinite(dz_max) || std::abs(dz_max) > 2.0 * p.visibility) {
        throw OutOfRange("delta_b: |dz| exceeds twice the visibility");
    }
    return 2.0 * std::asin(dz_max / (2.0 * p.visibility)) / (kTwoPi * p.swap_sensitivity * p.t_int());
}

double differential_sensitivity(double std_dz, const FieldProtocolParams &p) {
    p.validate();
    if (!(std_dz >= 0)) throw InvalidArgument("std_dz must be >= 0");
    return std_dz / (kTwoPi * p.visibility * p.swap_sensitivity * p.t_int());
}

double sensitivity(double std_dz, const FieldProtocolParams &p) { return 0.5 * differential_sensitivity(std_dz, p); }

double sql(double n_tot, const FieldProtocolParams &p) {
    p.validate();
    if (!(n_tot >= 1)) throw InvalidArgument("sql: n_tot must be >= 1");
    return 1.0 / (kTwoPi * p.visibility * p.swap_sensitivity * p.t_int() * std::sqrt(n_tot));
}

double DetectionBudget::classical_dz_variance() const {
    if (!(n_left > 0) || !(n_right > 0)) throw DegenerateInput("detection budget: empty region");
    const double s2 = detection_sigma * detection_sigma;
    return 1.0 / n_left + 1.0 / n_right + clouds_left * s2 / (n_left * n_left) +
           clouds_right * s2 / (n_right * n_right);
}

double sql_with_detection(const DetectionBudget &budget, const FieldProtocolParams &p) {
    return sensitivity(std::sqrt(budget.classical_dz_variance()), p);
}

double working_point_dz(double phi_left, double dphi, double visibility) {
    return -2.0 * visibility * std::sin(0.5 * dphi) * std::cos(0.5 * dphi + phi_left);
}

double working_point_phase(double phi_mean) { return -0.5 * kPi - phi_mean; }

double accumulated_phase(double field, double swap_detuning_hz, const FieldProtocolParams &p) {
    return kTwoPi * (p.swap_sensitivity * field + swap_detuning_hz) * p.t_int();
}

void GradiometerGeometry::validate() const {
    if (!(baseline_um > 0) || !std::isfinite(baseline_um)) throw InvalidArgument("baseline must be > 0");
}

GradiometerGeometry GradiometerGeometry::from_regions(const std::vector<SiteParams> &sites, const Region &left,
                                                      const Region &right) {
    GradiometerGeometry g;
    g.baseline_um = region_centroid(sites, right) - region_centroid(sites, left);
    return g;
}

double gradient_estimate(double delta_b, const GradiometerGeometry &geometry) {
    geometry.validate();
    return delta_b / geometry.baseline_um;
}

double duty_cycle_sensitivity(double sigma_b, double cycle_time) {
    if (!(cycle_time > 0)) throw InvalidArgument("cycle time must be > 0");
    return sigma_b * std::sqrt(cycle_time);
}

// ---------------------------------------------------------------------------

Sequence ramsey_with_phase(double t_hold, double readout_phase, const RamseyOptions &options) {
    auto r = step::Readout::ramsey(readout_phase);
    r.rabi = options.oat.rabi;
    r.ideal = options.oat.ideal_pulses;
    return make_ramsey_sequence(t_hold, r, options);
}

namespace {

Region all_sites(std::size_t n) {
    Region r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<int>(i);
    return r;
}

FieldProtocolParams params_for(const FieldProtocolParams &base, double t_hold, double t_pi, double visibility) {
    FieldProtocolParams p = base;
    p.t_hold = t_hold;
    p.t_pi = t_pi;
    p.visibility = visibility;
    return p;
}

}  // namespace

FringeCalibration calibrate_fringe(const RunConfig &config, double t_hold, const Region &region,
                                   const RamseyOptions &options) {
    const auto full = ramsey_with_phase(t_hold, 0.0, options);
    const std::size_t cut = tail_start(full);
    const auto prefix = split_sequence(full, cut).first;

    RunConfig c = config;
    c.loss.enabled = false;
    const auto sites = run_lattice(c);
    const auto mids = noiseless_states(c, prefix);
    ExecutionEnv env;
    env.lattice = &c.lattice;
    env.gen_field_to_detuning = c.noise.gen_field_to_detuning;
    // First harmonic of z(Phi) from 8 equally spaced readout phases. A finite
    // readout pulse adds an offset and higher harmonics, which the DFT
    // rejects up to the 6th.
    constexpr int kPhases = 8;
    double re = 0.0, im = 0.0;
    for (int k = 0; k < kPhases; ++k) {
        const double phi = kTwoPi * k / kPhases;
        const auto tail = split_sequence(ramsey_with_phase(t_hold, phi, options), cut).second;
        std::vector<CollectiveState> out;
        out.reserve(sites.size());
        for (std::size_t i = 0; i < sites.size(); ++i) {
            if (std::find(region.begin(), region.end(), static_cast<int>(i)) == region.end()) {
                out.push_back(mids[i]);  // not read; keeps indices aligned
                continue;
            }
            out.push_back(execute_from(mids[i], tail, sites[i], ShotNoise{}, c.protocol, env));
        }
        const double z = expected_imbalance(out, region);
        re += z * std::cos(phi);
        im += z * std::sin(phi);
    }
    // z = V cos(phase + Phi): re -> V cos(phase), im -> -V sin(phase).
    re *= 2.0 / kPhases;
    im *= 2.0 / kPhases;
    return {std::atan2(-im, re), std::hypot(re, im)};
}

double expected_imbalance(const std::vector<CollectiveState> &states, const Region &region) {
    double jz = 0.0, n = 0.0;
    for (int i : region) {
        jz += moments(states.at(i)).mean_jz;
        n += states.at(i).n_atoms();
    }
    if (!(n > 0)) throw DegenerateInput("expected_imbalance: empty region");
    return 2.0 * jz / n;
}

std::vector<double> ensemble_imbalance(const std::vector<ShotRecord> &shots, const Region &region) {
    std::vector<double> z;
    z.reserve(shots.size());
    for (const auto &s : shots) z.push_back(imbalance(sum_region(s.detected(), region)));
    return z;
}

std::vector<double> differential_imbalance(const std::vector<ShotRecord> &shots, const Region &left,
                                           const Region &right) {
    std::vector<double> dz;
    dz.reserve(shots.size());
    for (const auto &s : shots) {
        const auto pops = s.detected();
        dz.push_back(imbalance(sum_region(pops, left)) - imbalance(sum_region(pops, right)));
    }
    return dz;
}

RamseyScan ramsey_scan(const RunConfig &config, const RamseyScanOptions &options) {
    if (options.t_hold.empty()) throw InvalidArgument("ramsey_scan: no hold times");
    if (options.fringe_phases < 4) throw InvalidArgument("ramsey_scan: need at least 4 fringe phases");
    RamseyScan scan;
    scan.sites = run_lattice(config);
    const int n_sites = static_cast<int>(scan.sites.size());
    if (options.left.empty() != options.right.empty()) throw InvalidArgument("ramsey_scan: give both regions or none");
    if (options.left.empty()) {
        const auto halves = split_halves(n_sites);
        scan.left = halves.regions[0];
        scan.right = halves.regions[1];
    } else {
        RegionSpec{{options.left, options.right}}.validate(n_sites);
        scan.left = options.left;
        scan.right = options.right;
    }
    const Region everything = all_sites(scan.sites.size());

    const auto n_points = options.t_hold.size();
    const auto n_phases = static_cast<std::size_t>(options.fringe_phases);
    std::vector<Sequence> tails;
    Sequence prefix;
    std::vector<std::vector<double>> phases(n_points);
    scan.points.resize(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
        auto &pt = scan.points[j];
        pt.t_hold = options.t_hold[j];
        pt.t_int = pt.t_hold + 2.0 * options.ramsey.t_pi;
        const auto cal = calibrate_fringe(config, pt.t_hold, everything, options.ramsey);
        pt.readout_phase = working_point_phase(cal.phase);
        pt.calibrated_visibility = cal.visibility;
        const auto seq = ramsey_with_phase(pt.t_hold, pt.readout_phase, options.ramsey);
        auto [head, tail] = split_sequence(seq, tail_start(seq));
        prefix = head;
        tails.push_back(tail);
    }
    for (std::size_t j = 0; j < n_points; ++j) {
        for (std::size_t k = 0; k < n_phases; ++k) {
            const double phi = scan.points[j].readout_phase + kTwoPi * static_cast<double>(k) / static_cast<double>(n_phases);
            phases[j].push_back(phi);
            const auto seq = ramsey_with_phase(scan.points[j].t_hold, phi, options.ramsey);
            tails.push_back(split_sequence(seq, tail_start(seq)).second);
        }
    }
    const TailSelector select = [n_points, n_phases](std::size_t shot, std::size_t v) {
        if (v < n_points) return true;
        return (v - n_points) % n_phases == shot % n_phases;
    };
    auto batch = run_shots(config, prefix, tails, select);

    for (std::size_t j = 0; j < n_points; ++j) {
        auto &pt = scan.points[j];
        pt.working_point = std::move(batch.records[j]);
        for (std::size_t k = 0; k < n_phases; ++k) {
            for (auto &r : batch.records[n_points + j * n_phases + k]) {
                pt.fringe.push_back(std::move(r));
                pt.fringe_phases.push_back(phases[j][k]);
            }
        }
        const auto z = ensemble_imbalance(pt.fringe, everything);
        pt.mean_fringe = fit_fringe(pt.fringe_phases, z);
        // Each shot's field offset shifts its accumulated phase; re-referencing
        // removes the shot-to-shot dephasing and leaves the single-shot contrast.
        std::vector<double> shifted(pt.fringe.size());
        const double s = config.protocol.swap_sensitivity;
        for (std::size_t i = 0; i < pt.fringe.size(); ++i) {
            shifted[i] = pt.fringe_phases[i] + kTwoPi * s * pt.fringe[i].noise.field_offset * pt.t_int;
        }
        pt.single_shot_fringe = fit_fringe(shifted, z);
    }
    return scan;
}

namespace {

double std_dev(const std::vector<double> &x, const std::vector<std::size_t> &idx) {
    return std::sqrt(sample_variance(x, idx));
}

double mean_total(const std::vector<ShotRecord> &shots, const Region &region) {
    double n = 0.0;
    for (const auto &s : shots) {
        const auto p = sum_region(s.detected(), region);
        n += p.n_a + p.n_b;
    }
    return n / static_cast<double>(shots.size());
}

double clamp_visibility(double v) { return std::min(1.0, std::max(v, 1e-12)); }

}  // namespace

std::vector<ScanRow> sensitivity_table(const RamseyScan &scan, const FieldProtocolParams &base, double detection_sigma,
                                       const BootstrapOptions &boot) {
    std::vector<ScanRow> rows;
    for (const auto &pt : scan.points) {
        const auto dz = differential_imbalance(pt.working_point, scan.left, scan.right);
        ScanRow row;
        row.x_value = pt.t_int;
        row.visibility_mean = pt.mean_fringe.visibility;
        row.visibility_single = pt.single_shot_fringe.visibility;
        const auto p = params_for(base, pt.t_hold, 0.5 * (pt.t_int - pt.t_hold), clamp_visibility(row.visibility_mean));
        const auto est = bootstrap([&](const std::vector<std::size_t> &idx) { return std_dev(dz, idx); }, dz.size(),
                                   boot, "std_dz");
        row.std_dz = est.value;
        row.sigma_b = sensitivity(est.value, p);
        row.ci = sensitivity(est.std_error, p);
        const double n_left = mean_total(pt.working_point, scan.left);
        const double n_right = mean_total(pt.working_point, scan.right);
        row.n_tot = n_left + n_right;
        const auto classical = params_for(base, pt.t_hold, 0.5 * (pt.t_int - pt.t_hold), 1.0);
        row.sql = sql(row.n_tot, classical);
        DetectionBudget budget{n_left, n_right, 2 * static_cast<int>(scan.left.size()),
                               2 * static_cast<int>(scan.right.size()), detection_sigma};
        row.sql_det = sql_with_detection(budget, classical);
        row.enhancement = 1.0 - row.sigma_b / row.sql;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ScanRow> sensitivity_scan(const RunConfig &config, const RamseyScanOptions &options) {
    const auto scan = ramsey_scan(config, options);
    FieldProtocolParams base;
    base.swap_sensitivity = config.protocol.swap_sensitivity;
    return sensitivity_table(scan, base, config.noise.detection_sigma, options.bootstrap);
}

std::vector<GradientEstimate> gradient_estimates(const RamseyScan &scan, const FieldProtocolParams &base,
                                                 const BootstrapOptions &boot) {
    const auto geometry = GradiometerGeometry::from_regions(scan.sites, scan.left, scan.right);
    std::vector<GradientEstimate> out;
    for (const auto &pt : scan.points) {
        const auto dz = differential_imbalance(pt.working_point, scan.left, scan.right);
        GradientEstimate g;
        g.t_int = pt.t_int;
        g.baseline_um = geometry.baseline_um;
        g.visibility = clamp_visibility(pt.mean_fringe.visibility);
        const auto p = params_for(base, pt.t_hold, 0.5 * (pt.t_int - pt.t_hold), g.visibility);
        auto to_gradient = [&](double mean_dz) { return gradient_estimate(-delta_b(mean_dz, p), geometry); };
        const auto est = bootstrap([&](const std::vector<std::size_t> &idx) { return sample_mean(dz, idx); },
                                   dz.size(), boot, "mean_dz");
        g.mean_dz = est.value;
        g.mean_dz_err = est.std_error;
        g.delta_b = -delta_b(est.value, p);
        g.gradient = to_gradient(est.value);
        g.gradient_err = std::abs(to_gradient(est.value + est.std_error) - to_gradient(est.value - est.std_error)) / 2.0;
        out.push_back(g);
    }
    return out;
}

LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &sigma) {
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("fit_line: need two points");
    if (!sigma.empty() && sigma.size() != x.size()) throw InvalidArgument("fit_line: sigma size mismatch");
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0)) throw DegenerateInput("fit_line: all x equal");
    LineFit f;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / sw;
    double ss_res = 0, ss_tot = 0;
    const double ym = sy / sw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss_res += w * r * r;
        ss_tot += w * (y[i] - ym) * (y[i] - ym);
    }
    f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (sigma.empty()) {
        const double dof = static_cast<double>(x.size()) - 2.0;
        f.slope_err = dof > 0 ? std::sqrt(ss_res / dof * sw / det) : 0.0;
    } else {
        f.slope_err = std::sqrt(sw / det);
    }
    return f;
}

LineFit fit_line_through_origin(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.empty()) throw InsufficientData("fit_line_through_origin: no points");
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    if (!(sxx > 0)) throw DegenerateInput("fit_line_through_origin: all x zero");
    LineFit f;
    f.slope = sxy / sxx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss_res += (y[i] - f.slope * x[i]) * (y[i] - f.slope * x[i]);
    f.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

GradientFit gradient_from_slope(const std::vector<GradientEstimate> &points, double swap_sensitivity) {
    if (points.size() < 2) throw InsufficientData("gradient_from_slope: need two hold times");
    std::vector<double> t, phi, err;
    for (const auto &p : points) {
        const double v = p.visibility;
        const double x = p.mean_dz / (2.0 * v);
        if (std::abs(x) >= 1.0) throw OutOfRange("gradient_from_slope: |dz| exceeds twice the visibility");
        t.push_back(p.t_int);
        phi.push_back(2.0 * std::asin(x));
        // d/d(dz) of 2 asin(dz / 2V) = 1 / (V sqrt(1 - x^2)).
        err.push_back(std::max(p.mean_dz_err, 1e-15) / (v * std::sqrt(1.0 - x * x)));
    }
    const auto line = fit_line(t, phi, err);
    GradientFit g;
    g.baseline_um = points.front().baseline_um;
    // phi_left - phi_right = 2 pi S (B_left - B_right) t; the gradient is (B_right - B_left) / d.
    g.gradient = -line.slope / (kTwoPi * swap_sensitivity * g.baseline_um);
    g.gradient_err = line.slope_err / (kTwoPi * swap_sensitivity * g.baseline_um);
    g.intercept = line.intercept;
    g.r_squared = line.r_squared;
    return g;
}

GradientRow gradient_row(const std::vector<ShotRecord> &shots, const std::vector<SiteParams> &sites, const Region &left,
                         const Region &right, const FieldProtocolParams &params, const BootstrapOptions &boot) {
    const auto geometry = GradiometerGeometry::from_regions(sites, left, right);
    const auto dz = differential_imbalance(shots, left, right);
    GradientRow row;
    row.baseline_um = geometry.baseline_um;
    const auto est =
        bootstrap([&](const std::vector<std::size_t> &idx) { return std_dev(dz, idx); }, dz.size(), boot, "std_dz");
    row.sigma_grad = differential_sensitivity(est.value, params) / geometry.baseline_um;
    row.ci = differential_sensitivity(est.std_error, params) / geometry.baseline_um;
    const double n_left = mean_total(shots, left), n_right = mean_total(shots, right);
    row.n_tot = n_left + n_right;
    FieldProtocolParams classical = params;
    classical.visibility = 1.0;
    row.sql_grad = differential_sensitivity(std::sqrt(1.0 / n_left + 1.0 / n_right), classical) / geometry.baseline_um;
    row.enhancement = 1.0 - row.sigma_grad / row.sql_grad;
    const auto l = region_series(shots, left), r = region_series(shots, right);
    row.xi2_rel_raw = xi2_rel_value(l, r, all_indices(shots.size()), 0.0, 0.0);
    return row;
}

std::vector<GradientRow> gradiometric_summing_gain(const std::vector<ShotRecord> &shots,
                                                   const std::vector<SiteParams> &sites, int max_window,
                                                   const FieldProtocolParams &params,
                                                   const BootstrapOptions &boot) {
    const int n = static_cast<int>(sites.size());
    if (max_window < 1 || 2 * max_window > n) throw InvalidArgument("summing window does not fit the lattice");
    std::vector<GradientRow> rows;
    for (int w = 1; w <= max_window; ++w) {
        Region left, right;
        for (int i = 0; i < w; ++i) {
            left.push_back(i);
            right.push_back(n - w + i);
        }
        auto row = gradient_row(shots, sites, left, right, params, boot);
        row.window = w;
        row.label = "outer-" + std::to_string(w);
        rows.push_back(row);
    }
    return rows;
}

std::vector<GradientRow> single_well_pairs(const std::vector<ShotRecord> &shots, const std::vector<SiteParams> &sites,
                                           const FieldProtocolParams &params, const BootstrapOptions &boot) {
    const int n = static_cast<int>(sites.size());
    std::vector<GradientRow> rows;
    for (int i = 0; i < n / 2; ++i) {
        auto row = gradient_row(shots, sites, {i}, {n - 1 - i}, params, boot);
        row.window = 1;
        row.label = "pair-" + std::to_string(i) + "-" + std::to_string(n - 1 - i);
        rows.push_back(row);
    }
    return rows;
}

double log_log_slope(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2) throw InsufficientData("log_log_slope: need two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DegenerateInput("log_log_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    if (sxx == 0) throw DegenerateInput("log_log_slope: all x equal");
    return sxy / sxx;
}

}  // namespace squeezemag
