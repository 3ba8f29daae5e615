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

#include "squeezemag/reproduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include "squeezemag/error.hpp"
#include "squeezemag/loss.hpp"
#include "squeezemag/random.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

using units::kPi;
using units::kTwoPi;
using nlohmann::json;

std::size_t Table::column(const std::string &n) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == n) return i;
    }
    throw InvalidArgument("table " + name + " has no column " + n);
}

std::vector<double> Table::values(const std::string &n) const {
    const auto c = column(n);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto &r : rows) v.push_back(r.at(c));
    return v;
}

const Table &FigureResult::table(const std::string &n) const {
    for (const auto &t : tables) {
        if (t.name == n) return t;
    }
    throw InvalidArgument("result " + target + " has no table " + n);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int shots_or(const ReproduceOptions &o, int fallback) { return o.shots > 0 ? o.shots : fallback; }

BootstrapOptions boot_for(const ReproduceOptions &o, std::uint64_t salt) {
    return {o.bootstrap_resamples, mix64(o.seed * 0x9e3779b97f4a7c15ULL + salt), o.workers};
}

RunConfig preset(const ReproduceOptions &o, int default_shots) {
    RunConfig c = reference_run_config();
    c.n_shots = shots_or(o, default_shots);
    c.master_seed = o.seed;
    c.workers = o.workers;
    return c;
}

Region span(int begin, int end) {
    Region r;
    for (int i = begin; i < end; ++i) r.push_back(i);
    return r;
}

Sequence single(const SequenceStep &s) {
    Sequence seq;
    seq.steps.push_back(s);
    return seq;
}

step::Readout readout_like(const RunConfig &config, double alpha) {
    auto r = step::Readout::tomography(alpha);
    if (!config.sequence.steps.empty()) {
        if (auto p = std::get_if<step::Readout>(&config.sequence.steps.back())) {
            r.rabi = p->rabi;
            r.ideal = p->ideal;
        }
    }
    return r;
}

json estimate_json(const EstimateResult &e) {
    return {{"value", e.value},
            {"std_error", e.std_error},
            {"db", units::to_db(e.value)},
            {"db_err", db_error(e.value, e.std_error)},
            {"n_shots", e.n_shots}};
}

json fit_json(const FringeFit &f) {
    return {{"visibility", f.visibility},     {"visibility_err", f.visibility_err}, {"phase_offset", f.phase_offset},
            {"offset", f.offset},             {"r_squared", f.r_squared},           {"residual_std", f.residual_std}};
}

Table tomography_table(const std::string &name, const TomographyScan &scan) {
    Table t{name,
            {"alpha_deg", "xi2_direct", "xi2_direct_err", "xi2_rel", "xi2_rel_err", "xi2_direct_db", "xi2_rel_db",
             "fit_direct", "fit_rel"},
            {}};
    auto eval = [](const FringeFit &f, double a) { return f.visibility * std::sin(2.0 * a + f.phase_offset) + f.offset; };
    for (const auto &p : scan.points) {
        t.rows.push_back({units::rad_to_deg(p.alpha), p.direct.value, p.direct.std_error, p.rel.value, p.rel.std_error,
                          units::to_db(p.direct.value), units::to_db(p.rel.value), eval(scan.direct_fit, p.alpha),
                          eval(scan.rel_fit, p.alpha)});
    }
    return t;
}

json tomography_json(const TomographyScan &s) {
    return {{"direct_fit", fit_json(s.direct_fit)},
            {"rel_fit", fit_json(s.rel_fit)},
            {"direct_min_alpha_deg", units::rad_to_deg(s.direct_min_alpha)},
            {"rel_min_alpha_deg", units::rad_to_deg(s.rel_min_alpha)},
            {"direct_fit_min", s.direct_fit.offset - std::abs(s.direct_fit.visibility)},
            {"rel_fit_min", s.rel_fit.offset - std::abs(s.rel_fit.visibility)}};
}

std::vector<double> degrees(double from, double to, double step) {
    std::vector<double> out;
    for (double d = from; d <= to + 1e-9; d += step) out.push_back(units::deg_to_rad(d));
    return out;
}

Table scan_table(const std::vector<ScanRow> &rows) {
    Table t{"sensitivity",
            {"x_value", "sigma_b_T", "ci_T", "sql_T", "sql_det_T", "enhancement", "visibility_mean",
             "visibility_single", "std_dz", "n_tot"},
            {}};
    for (const auto &r : rows) {
        t.rows.push_back({r.x_value, r.sigma_b, r.ci, r.sql, r.sql_det, r.enhancement, r.visibility_mean,
                          r.visibility_single, r.std_dz, r.n_tot});
    }
    return t;
}

Table fringe_table(const std::string &name, const RamseyPoint &pt, double swap_sensitivity) {
    Table t{name, {"phase_rad", "phase_single_rad", "z", "fit_mean", "fit_single"}, {}};
    Region all = span(0, static_cast<int>(pt.fringe.empty() ? 0 : pt.fringe.front().sites.size()));
    const auto z = ensemble_imbalance(pt.fringe, all);
    auto eval = [](const FringeFit &f, double x) { return f.visibility * std::sin(x + f.phase_offset) + f.offset; };
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double phi = pt.fringe_phases[i];
        const double single = phi + kTwoPi * swap_sensitivity * pt.fringe[i].noise.field_offset * pt.t_int;
        t.rows.push_back({phi, single, z[i], eval(pt.mean_fringe, phi), eval(pt.single_shot_fringe, single)});
    }
    return t;
}

Table gradient_table(const std::string &name, const std::vector<GradientRow> &rows) {
    Table t{name,
            {"window", "baseline_um", "sigma_grad_T_per_um", "ci_T_per_um", "sql_grad_T_per_um", "enhancement",
             "xi2_rel_raw_db", "n_tot"},
            {}};
    for (const auto &r : rows) {
        t.rows.push_back({static_cast<double>(r.window), r.baseline_um, r.sigma_grad, r.ci, r.sql_grad, r.enhancement,
                          units::to_db(r.xi2_rel_raw), r.n_tot});
    }
    return t;
}

FieldProtocolParams field_params(const RunConfig &c, double t_hold, double visibility) {
    FieldProtocolParams p;
    p.swap_sensitivity = c.protocol.swap_sensitivity;
    p.t_hold = t_hold;
    p.visibility = visibility;
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig reference_run_config() {
    RunConfig c;
    c.lattice.n_sites = 25;
    c.lattice.atom_number_law.kind = AtomNumberLaw::Kind::StratifiedUniform;
    c.lattice.atom_number_law.min = 384;
    c.lattice.atom_number_law.max = 600;
    c.loss.enabled = true;
    c.sequence = make_oat_sequence(20e-3, 0.0);
    c.calibrate_readout = true;
    c.n_shots = 1000;
    return c;
}

Sequence make_css_sequence(const OatOptions &options) {
    Sequence seq;
    seq.name = "css";
    step::Pulse p;
    p.rabi = options.rabi;
    p.phase = 0.0;
    p.duration = 0.5 * kPi / options.rabi;
    p.ideal = options.ideal_pulses;
    seq.steps.push_back(p);
    auto r = step::Readout::tomography(0.0);
    r.rabi = options.rabi;
    r.ideal = options.ideal_pulses;
    seq.steps.push_back(r);
    return seq;
}

double db_error(double value, double err) {
    if (!(value > 0)) return std::numeric_limits<double>::quiet_NaN();
    return 10.0 / std::log(10.0) * err / value;
}

double sinusoid_min_angle(const FringeFit &fit) {
    // V sin(2a + phi) + C is minimal at 2a + phi = -pi/2 (V >= 0 from the fit).
    double a = 0.5 * (-0.5 * kPi - fit.phase_offset);
    while (a <= -0.5 * kPi) a += kPi;
    while (a > 0.5 * kPi) a -= kPi;
    return a;
}

TomographyScan analyse_tomography(const std::vector<std::vector<ShotRecord>> &records, const std::vector<double> &alphas,
                                  int n_sites, double detection_sigma, const BootstrapOptions &boot) {
    if (records.size() != alphas.size()) throw InvalidArgument("analyse_tomography: one record set per angle");
    if (alphas.size() < 3) throw InsufficientData("analyse_tomography: need at least 3 angles");
    const auto halves = split_halves(n_sites);
    const Region all = span(0, n_sites);
    TomographyScan scan;
    std::vector<double> x, yd, yr;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        TomographyPoint p;
        p.alpha = alphas[k];
        BootstrapOptions b = boot;
        b.seed = mix64(boot.seed + k);
        p.direct = xi2_direct(records[k], all, detection_sigma, b);
        p.rel = xi2_rel(records[k], halves.regions[0], halves.regions[1], detection_sigma, b);
        x.push_back(2.0 * p.alpha);
        yd.push_back(p.direct.value);
        yr.push_back(p.rel.value);
        scan.points.push_back(p);
    }
    scan.direct_fit = fit_fringe(x, yd);
    scan.rel_fit = fit_fringe(x, yr);
    scan.direct_min_alpha = sinusoid_min_angle(scan.direct_fit);
    scan.rel_min_alpha = sinusoid_min_angle(scan.rel_fit);
    return scan;
}

TomographyScan tomography_scan(const RunConfig &config, const Sequence &prefix, const std::vector<double> &alphas,
                               const BootstrapOptions &boot) {
    std::vector<Sequence> tails;
    for (double a : alphas) tails.push_back(single(readout_like(config, a)));
    const auto batch = run_shots(config, prefix, tails);
    return analyse_tomography(batch.records, alphas, static_cast<int>(batch.sites.size()),
                              config.noise.detection_sigma, boot);
}

TechnicalNoise technical_noise(const std::vector<ShotRecord> &shots, const std::vector<SiteParams> &sites,
                               const std::vector<long> &targets, double detection_sigma,
                               const CombinationOptions &combos, const BootstrapOptions &boot) {
    if (shots.size() < 2) throw InsufficientData("technical_noise: need at least 2 shots");
    const double s2 = detection_sigma * detection_sigma;
    // Per target: the (diff, total) series of every subset.
    struct Subset {
        std::vector<double> diff, tot;
        double det_var = 0.0;
    };
    std::vector<std::vector<Subset>> groups;
    for (long target : targets) {
        Stream rng = substream(boot.seed, StreamPurpose::Combinations, {static_cast<std::uint64_t>(target)});
        std::vector<Subset> g;
        for (const auto &region : enumerate_combinations(sites, target, combos, rng)) {
            Subset s;
            for (const auto &p : region_series(shots, region)) {
                s.diff.push_back(p.n_b - p.n_a);
                s.tot.push_back(p.n_b + p.n_a);
            }
            s.det_var = 2.0 * static_cast<double>(region.size()) * s2;
            g.push_back(std::move(s));
        }
        if (!g.empty()) groups.push_back(std::move(g));
    }
    auto fit = [&](const std::vector<std::size_t> &idx) {
        std::vector<double> n, v;
        for (const auto &g : groups) {
            double vs = 0.0, ns = 0.0;
            for (const auto &s : g) {
                vs += sample_variance(s.diff, idx) - s.det_var;
                ns += sample_mean(s.tot, idx);
            }
            n.push_back(ns / static_cast<double>(g.size()));
            v.push_back(vs / static_cast<double>(g.size()));
        }
        return fit_quadratic_noise(n, v);
    };
    const auto full = fit(all_indices(shots.size()));
    const auto est =
        bootstrap([&](const std::vector<std::size_t> &idx) { return fit(idx).beta2; }, shots.size(), boot, "beta2");
    TechnicalNoise t;
    t.beta2 = full.beta2;
    t.beta2_err = est.std_error;
    t.linear = full.linear_term;
    t.at_1e4 = 1e4 * t.beta2;
    t.at_1e4_err = 1e4 * t.beta2_err;
    return t;
}

// ---------------------------------------------------------------------------
// Targets.

FigureResult reproduce_fig1b(const ReproduceOptions &o) {
    FigureResult res{"fig1b", {}, {}, json::object()};
    RunConfig c = preset(o, 1000);
    const auto [generation, unused] = split_sequence(c.sequence, c.sequence.steps.size() - 1);
    const double alpha = calibrate_tomography_angle(c, generation);

    auto t0 = Clock::now();
    const auto batch = run_shots(c, generation, {single(readout_like(c, alpha))});
    const double squeezed_s = seconds_since(t0);
    const auto &rec = batch.records[0];

    RunConfig css = c;
    css.sequence = make_css_sequence();
    css.calibrate_readout = false;
    t0 = Clock::now();
    const auto css_batch = run_shots(css, css.sequence, {Sequence{}});
    const double css_s = seconds_since(t0);
    const auto &css_rec = css_batch.records[0];

    const int n = c.lattice.n_sites, mid = n / 2;
    const double sigma = c.noise.detection_sigma;
    Table scaling{"scaling",
                  {"window", "n_tot", "xi2_rel_db", "xi2_rel_err_db", "xi2_direct_db", "xi2_direct_err_db",
                   "css_xi2_rel_db", "css_xi2_rel_err_db"},
                  {}};
    auto add_row = [&](int window, const Region &l, const Region &r) {
        Region both = l;
        both.insert(both.end(), r.begin(), r.end());
        const auto b = boot_for(o, 100 + window);
        const auto rel = xi2_rel(rec, l, r, sigma, b);
        const auto dir = xi2_direct(rec, both, sigma, b);
        const auto crel = xi2_rel(css_rec, l, r, sigma, b);
        const auto tot = region_series(rec, both);
        double ntot = 0.0;
        for (const auto &p : tot) ntot += p.n_a + p.n_b;
        ntot /= static_cast<double>(tot.size());
        scaling.rows.push_back({static_cast<double>(window), ntot, units::to_db(rel.value),
                                db_error(rel.value, rel.std_error), units::to_db(dir.value),
                                db_error(dir.value, dir.std_error), units::to_db(crel.value),
                                db_error(crel.value, crel.std_error)});
        return std::make_tuple(rel, dir, crel, ntot);
    };
    for (int k = 1; k <= mid; ++k) add_row(k, span(mid - k, mid), span(mid, mid + k));
    const auto halves = split_halves(n);
    const auto [rel, dir, crel, ntot] = add_row(n, halves.regions[0], halves.regions[1]);
    res.tables.push_back(scaling);
    res.plots.push_back({"fig1b.svg", "scaling", "n_tot", {"xi2_rel_db", "xi2_direct_db", "css_xi2_rel_db"},
                         "Squeezing vs atom number", "N_tot", "xi^2 (dB)", true, false});
    res.summary = {{"alpha_deg", units::rad_to_deg(alpha)},
                   {"shots", c.n_shots},
                   {"n_tot", ntot},
                   {"xi2_rel", estimate_json(rel)},
                   {"xi2_direct", estimate_json(dir)},
                   {"css_xi2_rel", estimate_json(crel)},
                   {"runtime_s", squeezed_s},
                   {"css_runtime_s", css_s}};
    return res;
}

FigureResult reproduce_fig1c(const ReproduceOptions &o) {
    FigureResult res{"fig1c", {}, {}, json::object()};
    RunConfig c = preset(o, 120);
    const auto generation = split_sequence(c.sequence, c.sequence.steps.size() - 1).first;
    const auto alphas = degrees(-75, 90, 15);
    const auto scan = tomography_scan(c, generation, alphas, boot_for(o, 200));
    res.tables.push_back(tomography_table("tomography", scan));
    res.plots.push_back({"fig1c.svg", "tomography", "alpha_deg", {"xi2_direct", "xi2_rel", "fit_direct", "fit_rel"},
                         "Variance vs tomography angle", "alpha (deg)", "xi^2", false, true});
    res.summary = tomography_json(scan);
    res.summary["calibrated_alpha_deg"] = units::rad_to_deg(calibrate_tomography_angle(c, generation));
    res.summary["shots"] = c.n_shots;
    return res;
}

FigureResult reproduce_fig2b(const ReproduceOptions &o) {
    FigureResult res{"fig2b", {}, {}, json::object()};
    RunConfig c = preset(o, 120);
    RamseyOptions ro;
    const auto full = make_ramsey_sequence(1e-6, step::Readout::tomography(0.0), ro);
    const auto [prefix, rest] = split_sequence(full, tail_start(full));
    const auto alphas = degrees(-90, 75, 15);
    std::vector<Sequence> tails;
    for (double a : alphas) {
        Sequence t = split_sequence(rest, rest.steps.size() - 1).first;
        t.steps.push_back(readout_like(c, a));
        tails.push_back(t);
    }
    const auto batch = run_shots(c, prefix, tails);
    const int n = static_cast<int>(batch.sites.size());
    const auto scan = analyse_tomography(batch.records, alphas, n, c.noise.detection_sigma, boot_for(o, 300));
    const auto raw = analyse_tomography(batch.records, alphas, n, 0.0, boot_for(o, 300));
    res.tables.push_back(tomography_table("tomography", scan));
    res.tables.push_back(tomography_table("tomography_raw", raw));
    res.plots.push_back({"fig2b.svg", "tomography", "alpha_deg", {"xi2_rel", "fit_rel"},
                         "Tomography after the swap", "alpha (deg)", "xi^2", false, true});
    res.summary = tomography_json(scan);
    res.summary["raw"] = tomography_json(raw);
    res.summary["shots"] = c.n_shots;
    return res;
}

FigureResult reproduce_fig2c(const ReproduceOptions &o) {
    FigureResult res{"fig2c", {}, {}, json::object()};
    RunConfig c = preset(o, 160);
    RamseyScanOptions so;
    so.t_hold = {1e-6};
    so.fringe_phases = 16;
    so.bootstrap = boot_for(o, 400);
    const auto scan = ramsey_scan(c, so);
    const auto &pt = scan.points[0];
    res.tables.push_back(fringe_table("fringe", pt, c.protocol.swap_sensitivity));
    res.plots.push_back({"fig2c.svg", "fringe", "phase_rad", {"z", "fit_mean"}, "Ramsey fringe at 1 us",
                         "readout phase (rad)", "z", false, false});
    const auto rel = xi2_rel(pt.working_point, scan.left, scan.right, c.noise.detection_sigma, so.bootstrap);
    const auto rel_raw = xi2_rel(pt.working_point, scan.left, scan.right, 0.0, so.bootstrap);
    const double v = pt.mean_fringe.visibility;
    res.summary = {{"mean_fringe", fit_json(pt.mean_fringe)},
                   {"single_shot_fringe", fit_json(pt.single_shot_fringe)},
                   {"visibility", v},
                   {"calibrated_visibility", pt.calibrated_visibility},
                   {"xi2_rel", estimate_json(rel)},
                   {"xi2_rel_raw", estimate_json(rel_raw)},
                   {"xi2_metrological_db", units::to_db(xi2_metrological(rel.value, v))},
                   {"shots", c.n_shots}};
    return res;
}

namespace {

// First t_int at which the enhancement turns negative, linearly interpolated.
json crossover(const std::vector<ScanRow> &rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double a = rows[i - 1].enhancement, b = rows[i].enhancement;
        if (a > 0 && b <= 0) {
            const double f = a / (a - b);
            return rows[i - 1].x_value + f * (rows[i].x_value - rows[i - 1].x_value);
        }
    }
    return nullptr;
}

RunConfig longterm_preset(const ReproduceOptions &o, int default_shots) {
    RunConfig c = preset(o, default_shots);
    c.noise.longterm_enabled = true;
    c.noise.longterm_block_size = 10;
    return c;
}

}  // namespace

FigureResult reproduce_fig3b(const ReproduceOptions &o) {
    FigureResult res{"fig3b", {}, {}, json::object()};
    RunConfig c = longterm_preset(o, 150);
    RamseyScanOptions so;
    const double t_pi = so.ramsey.t_pi;
    for (double t_int : {143.9e-6, 342e-6, 1e-3, 2e-3, 3.5e-3, 5e-3}) so.t_hold.push_back(t_int - 2.0 * t_pi);
    so.fringe_phases = 8;
    so.bootstrap = boot_for(o, 500);
    const auto scan = ramsey_scan(c, so);
    FieldProtocolParams base;
    base.swap_sensitivity = c.protocol.swap_sensitivity;
    const auto rows = sensitivity_table(scan, base, c.noise.detection_sigma, so.bootstrap);
    res.tables.push_back(scan_table(rows));
    res.plots.push_back({"fig3b.svg", "sensitivity", "x_value", {"sigma_b_T", "sql_T", "sql_det_T"},
                         "Field sensitivity vs interrogation time", "t_int (s)", "sigma_B (T)", true, true});
    res.plots.push_back({"fig3b_visibility.svg", "sensitivity", "x_value", {"visibility_mean", "visibility_single"},
                         "Mean and single-shot visibility", "t_int (s)", "V", true, false});

    const auto &r342 = rows[1];
    FieldProtocolParams anchor = base;
    anchor.t_hold = units::kSqlAnchorInterrogation - 2.0 * anchor.t_pi;
    anchor.visibility = 1.0;
    double single_dev = 0.0;
    for (const auto &r : rows) {
        single_dev = std::max(single_dev, std::abs(r.visibility_single / rows[0].visibility_single - 1.0));
    }
    res.summary = {{"sigma_b_342_pT", r342.sigma_b * 1e12},
                   {"ci_342_pT", r342.ci * 1e12},
                   {"sql_342_pT", r342.sql * 1e12},
                   {"enhancement_342", r342.enhancement},
                   {"sql_anchor_pT", sql(units::kSqlAnchorAtoms, anchor) * 1e12},
                   {"duty_cycle_sensitivity_T_per_rtHz", duty_cycle_sensitivity(r342.sigma_b, units::kCycleTime)},
                   {"crossover_t_int_s", crossover(rows)},
                   {"visibility_mean_first", rows.front().visibility_mean},
                   {"visibility_mean_last", rows.back().visibility_mean},
                   {"visibility_single_max_rel_dev", single_dev},
                   {"shots", c.n_shots}};
    return res;
}

FigureResult reproduce_fig4a(const ReproduceOptions &o) {
    FigureResult res{"fig4a", {}, {}, json::object()};
    RunConfig c = preset(o, 150);
    const double injected = 19.6e-12;
    c.protocol.field_gradient = injected;
    c.protocol.gradient_origin_um = 0.5 * (c.lattice.n_sites - 1) * c.lattice.spacing_um;

    RamseyScanOptions so;
    const double t_pi = so.ramsey.t_pi;
    const std::vector<double> t_ints{143.9e-6, 342e-6, 600e-6, 900e-6};
    for (double t : t_ints) so.t_hold.push_back(t - 2.0 * t_pi);
    so.fringe_phases = 8;
    so.bootstrap = boot_for(o, 600);
    const auto scan = ramsey_scan(c, so);
    FieldProtocolParams base;
    base.swap_sensitivity = c.protocol.swap_sensitivity;
    const auto points = gradient_estimates(scan, base, so.bootstrap);
    const auto fit = gradient_from_slope(points, base.swap_sensitivity);

    Table t{"gradient",
            {"t_int_s", "mean_dz", "mean_dz_err", "delta_b_T", "gradient_T_per_um", "gradient_err_T_per_um",
             "visibility", "noiseless_dz"},
            {}};

    // Expectation-value dz without any noise or loss.
    RunConfig quiet = c;
    quiet.noise = NoiseConfig::none();
    quiet.loss.enabled = false;
    std::vector<double> nd, nx;
    std::vector<GradientEstimate> quiet_points;
    const Region all = span(0, c.lattice.n_sites);
    for (const auto &g : points) {
        const double t_hold = g.t_int - 2.0 * t_pi;
        const auto cal = calibrate_fringe(quiet, t_hold, all, so.ramsey);
        const auto states = noiseless_states(quiet, ramsey_with_phase(t_hold, working_point_phase(cal.phase), so.ramsey));
        const double dz = expected_imbalance(states, scan.left) - expected_imbalance(states, scan.right);
        nx.push_back(g.t_int);
        nd.push_back(dz);
        GradientEstimate q = g;
        q.mean_dz = dz;
        q.mean_dz_err = 1e-6;
        q.visibility = cal.visibility;
        quiet_points.push_back(q);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto &g = points[i];
        t.rows.push_back(
            {g.t_int, g.mean_dz, g.mean_dz_err, g.delta_b, g.gradient, g.gradient_err, g.visibility, nd[i]});
    }
    const auto origin_fit = fit_line_through_origin(nx, nd);
    const auto quiet_fit = gradient_from_slope(quiet_points, base.swap_sensitivity);
    res.tables.push_back(t);
    res.plots.push_back({"fig4a.svg", "gradient", "t_int_s", {"mean_dz", "noiseless_dz"},
                         "Differential imbalance vs interrogation time", "t_int (s)", "dz", false, false});
    res.summary = {{"injected_T_per_um", injected},
                   {"gradient_T_per_um", fit.gradient},
                   {"gradient_err_T_per_um", fit.gradient_err},
                   {"intercept_rad", fit.intercept},
                   {"r_squared", fit.r_squared},
                   {"baseline_um", fit.baseline_um},
                   {"noiseless_gradient_T_per_um", quiet_fit.gradient},
                   {"noiseless_origin_slope", origin_fit.slope},
                   {"noiseless_origin_r_squared", origin_fit.r_squared},
                   {"shots", c.n_shots}};
    return res;
}

FigureResult reproduce_fig4b(const ReproduceOptions &o) {
    FigureResult res{"fig4b", {}, {}, json::object()};
    const double t_int = 342e-6;
    RamseyScanOptions so;
    so.t_hold = {t_int - 2.0 * so.ramsey.t_pi};
    so.fringe_phases = 8;
    so.bootstrap = boot_for(o, 700);

    // Single-well pairs: equal atom numbers and no technical noise or loss,
    // so only the baseline changes from pair to pair.
    RunConfig pc = preset(o, 400);
    pc.lattice.atom_number_law.kind = AtomNumberLaw::Kind::Constant;
    pc.lattice.atom_number_law.min = 492;
    pc.noise = NoiseConfig::none();
    pc.noise.detection_sigma = 0.0;
    pc.loss.enabled = false;
    if (o.shots > 0) pc.n_shots = std::max(o.shots, 100);
    const auto pscan = ramsey_scan(pc, so);
    const auto &pp = pscan.points[0];
    const auto pairs = single_well_pairs(pp.working_point, pscan.sites,
                                         field_params(pc, so.t_hold[0], pp.mean_fringe.visibility), so.bootstrap);
    std::vector<double> d, s;
    for (const auto &r : pairs) {
        d.push_back(r.baseline_um);
        s.push_back(r.sigma_grad);
    }
    res.tables.push_back(gradient_table("single_wells", pairs));

    // Summed windows at the reference parameters.
    RunConfig c = preset(o, 150);
    const auto scan = ramsey_scan(c, so);
    const auto &pt = scan.points[0];
    const auto params = field_params(c, so.t_hold[0], pt.mean_fringe.visibility);
    auto rows = gradiometric_summing_gain(pt.working_point, scan.sites, c.lattice.n_sites / 2, params, so.bootstrap);
    auto full = gradient_row(pt.working_point, scan.sites, scan.left, scan.right, params, so.bootstrap);
    full.label = "halves";
    full.window = c.lattice.n_sites;
    rows.push_back(full);
    res.tables.push_back(gradient_table("summed", rows));
    res.plots.push_back({"fig4b_single.svg", "single_wells", "baseline_um", {"sigma_grad_T_per_um"},
                         "Single-well gradient sensitivity", "baseline (um)", "sigma (T/um)", true, true});
    res.plots.push_back({"fig4b_summed.svg", "summed", "window", {"sigma_grad_T_per_um", "sql_grad_T_per_um"},
                         "Summed-window gradient sensitivity", "window (sites)", "sigma (T/um)", false, true});

    const double v = pt.mean_fringe.visibility;
    res.summary = {{"single_well_exponent", log_log_slope(d, s)},
                   {"full_sigma_grad_pT_per_um", full.sigma_grad * 1e12},
                   {"full_ci_pT_per_um", full.ci * 1e12},
                   {"full_enhancement", full.enhancement},
                   {"full_xi2_rel_raw_db", units::to_db(full.xi2_rel_raw)},
                   {"predicted_enhancement", 1.0 - std::sqrt(full.xi2_rel_raw) / v},
                   {"visibility", v},
                   {"enhancement_at_2p4_db", 1.0 - std::pow(10.0, -2.4 / 20.0)},
                   {"single_well_shots", pc.n_shots},
                   {"shots", c.n_shots}};
    return res;
}

FigureResult reproduce_supp2(const ReproduceOptions &o) {
    FigureResult res{"supp2", {}, {}, json::object()};
    RunConfig c = preset(o, 1);
    c.noise = NoiseConfig::none();
    c.loss.enabled = false;
    const auto generation = split_sequence(c.sequence, c.sequence.steps.size() - 1).first;
    ExecutionEnv env;
    env.lattice = &c.lattice;
    Table t{"per_site", {"n_atoms", "xi2_min_db", "alpha_min_deg", "max_variance_db", "mean_spin"}, {}};
    for (int n = 300; n <= 600; n += 25) {
        SiteParams site{0, n, chi_of_n(c.lattice, n), delta_of_n(c.lattice, n), 0.0};
        const auto m = moments(execute(generation, site, ShotNoise{}, c.protocol, env));
        // An ideal tomography rotation by alpha reads J . (sin alpha, 0, cos alpha).
        const double cxx = m.cov[0][0], czz = m.cov[2][2], cxz = m.cov[0][2];
        const double mean = 0.5 * (cxx + czz), amp = std::hypot(0.5 * (czz - cxx), cxz);
        const double alpha = 0.5 * std::atan2(-cxz, -0.5 * (czz - cxx));
        t.rows.push_back({static_cast<double>(n), units::to_db(4.0 * (mean - amp) / n), units::rad_to_deg(alpha),
                          units::to_db(4.0 * (mean + amp) / n), 2.0 * m.mean_length() / n});
    }
    res.tables.push_back(t);
    res.plots.push_back({"supp2.svg", "per_site", "n_atoms", {"xi2_min_db", "max_variance_db"},
                         "Per-site squeezing vs atom number", "N", "dB", false, false});
    res.plots.push_back({"supp2_angle.svg", "per_site", "n_atoms", {"alpha_min_deg"}, "Optimal tomography angle", "N",
                         "alpha (deg)", false, false});
    const auto xi = t.values("xi2_min_db"), al = t.values("alpha_min_deg");
    res.summary = {{"xi2_min_db_range", {*std::min_element(xi.begin(), xi.end()), *std::max_element(xi.begin(), xi.end())}},
                   {"alpha_min_deg_range", {*std::min_element(al.begin(), al.end()), *std::max_element(al.begin(), al.end())}}};
    return res;
}

FigureResult reproduce_supp4(const ReproduceOptions &o) {
    FigureResult res{"supp4", {}, {}, json::object()};
    struct Variant {
        std::string name;
        bool echo;
        double pulse_sigma;
    };
    const std::vector<Variant> variants{{"no_echo", false, 0.0}, {"echo", true, 0.0}, {"echo_pulse", true, 1.5}};
    const auto alphas = degrees(0, 90, 15);
    const std::vector<long> targets{1500, 3000, 4500, 6000, 7500, 9000, 10500};
    CombinationOptions combos;
    combos.max_subsets = 100;

    Table t{"beta2", {"alpha_deg"}, {}};
    for (double a : alphas) t.rows.push_back({units::rad_to_deg(a)});
    json variants_json = json::object();
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto &v = variants[vi];
        RunConfig c = preset(o, 150);
        c.loss.enabled = false;
        c.noise.pulse_detuning_sigma = v.pulse_sigma;
        OatOptions oat;
        oat.echo = v.echo;
        c.sequence = make_oat_sequence(15e-3, 0.0, oat);
        c.calibrate_readout = false;
        const auto generation = split_sequence(c.sequence, c.sequence.steps.size() - 1).first;
        std::vector<Sequence> tails;
        for (double a : alphas) tails.push_back(single(readout_like(c, a)));
        const auto batch = run_shots(c, generation, tails);
        t.columns.push_back(v.name);
        t.columns.push_back(v.name + "_err");
        std::vector<double> curve;
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            const auto tn = technical_noise(batch.records[k], batch.sites, targets, c.noise.detection_sigma, combos,
                                            boot_for(o, 800 + 16 * vi + k));
            t.rows[k].push_back(tn.at_1e4);
            t.rows[k].push_back(tn.at_1e4_err);
            curve.push_back(tn.at_1e4);
        }
        const auto peak = std::max_element(curve.begin(), curve.end()) - curve.begin();
        variants_json[v.name] = {{"peak", curve[peak]},
                                 {"peak_err", t.rows[peak].back()},
                                 {"peak_alpha_deg", units::rad_to_deg(alphas[peak])},
                                 {"at_0", curve.front()},
                                 {"at_0_err", t.rows.front().back()}};
    }
    res.tables.push_back(t);
    res.plots.push_back({"supp4.svg", "beta2", "alpha_deg", {"no_echo", "echo", "echo_pulse"},
                         "Technical noise vs tomography angle", "alpha (deg)", "beta^2 x 1e4", false, false});
    res.summary = {{"variants", variants_json},
                   {"targets", targets},
                   {"echo_reduction",
                    variants_json["no_echo"]["peak"].get<double>() / variants_json["echo"]["peak"].get<double>()},
                   {"shots", shots_or(o, 150)}};
    return res;
}

FigureResult reproduce_supp5(const ReproduceOptions &o) {
    FigureResult res{"supp5", {}, {}, json::object()};
    RunConfig c = longterm_preset(o, 160);
    RamseyScanOptions so;
    so.t_hold = {1e-6, 400e-6};
    so.fringe_phases = 16;
    so.bootstrap = boot_for(o, 900);
    const auto scan = ramsey_scan(c, so);
    json pts = json::array();
    for (std::size_t j = 0; j < scan.points.size(); ++j) {
        const auto &pt = scan.points[j];
        const std::string name = j == 0 ? "fringe_short" : "fringe_long";
        res.tables.push_back(fringe_table(name, pt, c.protocol.swap_sensitivity));
        res.plots.push_back({name + ".svg", name, "phase_rad", {"z", "fit_mean"}, "Ramsey fringe",
                             "readout phase (rad)", "z", false, false});
        pts.push_back({{"t_int_s", pt.t_int},
                       {"visibility_mean", pt.mean_fringe.visibility},
                       {"visibility_single", pt.single_shot_fringe.visibility}});
    }
    res.summary = {{"points", pts}, {"shots", c.n_shots}};
    return res;
}

FigureResult loss_floor_scan(const LossFloorOptions &o) {
    if (o.n_atoms < 2) throw InvalidArgument("loss floor: need at least 2 atoms");
    if (!(o.dt > 0) || !(o.t_max >= 0)) throw InvalidArgument("loss floor: bad time grid");
    FigureResult res{"loss-floor", {}, {}, json::object()};
    LatticeConfig lat;
    lat.delta0 = 0.0;
    lat.delta_slope = 0.0;
    std::vector<double> times;
    const int steps = static_cast<int>(std::floor(o.t_max / o.dt + 1e-9));
    for (int i = 0; i <= steps; ++i) times.push_back(o.dt * i);
    LossScanOptions lo;
    lo.n_trajectories = o.trajectories;
    lo.workers = o.workers;
    lo.seed = o.seed;
    const auto scan = evolve_with_loss(make_css(o.n_atoms, 0.5 * kPi, 0.0), twisting_law(lat), o.loss, times, lo);
    Table t{"loss_floor", {"t", "squeezing_db", "number_squeezing_db", "mean_spin", "n_mean", "stderr"}, {}};
    std::size_t best = 0;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const auto &p = scan[i];
        t.rows.push_back({p.t, p.squeezing_db, p.number_squeezing_db, p.mean_spin, p.n_mean, p.stderr_db});
        if (p.squeezing_db < scan[best].squeezing_db) best = i;
    }
    res.tables.push_back(t);
    res.plots.push_back({"loss_floor.svg", "loss_floor", "t", {"squeezing_db", "number_squeezing_db"},
                         "Squeezing with atom loss", "t (s)", "dB", false, false});
    res.summary = {{"min_squeezing_db", scan[best].squeezing_db},
                   {"min_stderr_db", scan[best].stderr_db},
                   {"t_min_s", scan[best].t},
                   {"n_atoms", o.n_atoms},
                   {"trajectories", o.trajectories}};
    return res;
}

FigureResult reproduce_loss_floor(const ReproduceOptions &o) {
    LossFloorOptions lo;
    lo.trajectories = shots_or(o, 500);
    lo.seed = o.seed;
    lo.workers = o.workers;
    return loss_floor_scan(lo);
}

const std::vector<std::string> &reproduce_targets() {
    static const std::vector<std::string> t{"fig1b", "fig1c", "fig2b", "fig2c", "fig3b",  "fig4a",
                                            "fig4b", "supp2", "supp4", "supp5", "loss-floor"};
    return t;
}

FigureResult reproduce(const std::string &target, const ReproduceOptions &o) {
    static const std::map<std::string, std::function<FigureResult(const ReproduceOptions &)>> table{
        {"fig1b", reproduce_fig1b}, {"fig1c", reproduce_fig1c}, {"fig2b", reproduce_fig2b},
        {"fig2c", reproduce_fig2c}, {"fig3b", reproduce_fig3b}, {"fig4a", reproduce_fig4a},
        {"fig4b", reproduce_fig4b}, {"supp2", reproduce_supp2}, {"supp4", reproduce_supp4},
        {"supp5", reproduce_supp5}, {"loss-floor", reproduce_loss_floor}};
    const auto it = table.find(target);
    if (it == table.end()) {
        std::string list;
        for (const auto &t : reproduce_targets()) list += (list.empty() ? "" : ", ") + t;
        throw InvalidArgument("unknown target '" + target + "'; available: " + list);
    }
    auto t0 = Clock::now();
    auto res = it->second(o);
    res.summary["target"] = target;
    res.summary["seed"] = o.seed;
    res.summary["elapsed_s"] = seconds_since(t0);
    return res;
}

}  // namespace squeezemag
