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

// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below,
// seeds fixed. Every criterion is evaluated even when an earlier one fails.
//
// The exit status is 0 when every criterion was evaluated, whatever the
// verdicts; a crash or exception inside a criterion exits 1. Set
// SQUEEZEMAG_ACCEPTANCE_STRICT=1 to also exit 1 on any FAIL.
// SQUEEZEMAG_ACCEPTANCE_ONLY=1,4,7 runs a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "squeezemag/collective_spin.hpp"
#include "squeezemag/estimators.hpp"
#include "squeezemag/io.hpp"
#include "squeezemag/magnetometry.hpp"
#include "squeezemag/oracle.hpp"
#include "squeezemag/reproduce.hpp"

using namespace squeezemag;
using nlohmann::json;

namespace {

// --- pinned tolerances ------------------------------------------------------
constexpr double kCssTolDb = 0.3;
constexpr double kCssBudgetS = 120;
constexpr double kOracleTol = 1e-8;
constexpr double kKuRelTol = 0.01;
constexpr double kFullRelDb = -5.3, kFullDirectDb = -1.3, kFullTolDb = 1.0, kFullBudgetS = 600;
constexpr double kTomoR2 = 0.95, kTomoSeedTolDeg = 3.0;
constexpr double kSwapV = 0.95, kSwapTol = 0.02;
constexpr double kSigmaB342 = 310, kSigmaB342Tol = 47, kSqlAnchor = 382, kSingleVisTol = 0.02;
constexpr double kGradient = 19.6e-12, kOriginR2 = 0.99, kExponent = -1.0, kExponentTol = 0.05;
constexpr double kSummedGrad = 12, kSummedGradTol = 2, kEnhancement = 0.24, kEnhancementTol = 0.05;
constexpr double kEchoReduction = 3.0;
constexpr double kLossFloorDb = -9, kLossFloorTol = 1.5, kLossBudgetS = 1800;
constexpr double kIdentityTol = 1e-12;

constexpr std::uint64_t kSeed = 1;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ReproduceOptions opts(std::uint64_t seed = kSeed) {
    ReproduceOptions o;
    o.seed = seed;
    o.workers = 1;
    o.bootstrap_resamples = 200;
    return o;
}

double db_of(const json &estimate) { return units::to_db(estimate["value"].get<double>()); }

// fig1b feeds criteria 1 and 4.
const json &fig1b() {
    static const json s = reproduce("fig1b", opts()).summary;
    return s;
}

Verdict c1() {
    const auto &s = fig1b();
    const double db = db_of(s["css_xi2_rel"]), rt = s["css_runtime_s"].get<double>();
    const bool pass = std::abs(db) <= kCssTolDb && rt < kCssBudgetS;
    return {pass, fmt("xi2_rel(CSS) = %+.2f dB", db) + fmt(" (|x| <= %.1f dB)", kCssTolDb) +
                      fmt(", %.0f s", rt) + fmt(" (< %.0f s)", kCssBudgetS) +
                      fmt(", N_tot = %.0f", s["n_tot"].get<double>())};
}

Verdict c2() {
    Stream r = substream(kSeed, StreamPurpose::Test, {2});
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const int n = 1 + static_cast<int>(r.below(8));
        std::vector<cdouble> a(n + 1);
        double norm = 0;
        for (auto &x : a) {
            x = {r.normal(), r.normal()};
            norm += std::norm(x);
        }
        for (auto &x : a) x /= std::sqrt(norm);
        const CollectiveState s(n, a);
        const HamiltonianParams h{units::kTwoPi * 400 * r.uniform(), units::kTwoPi * r.uniform(),
                                  units::kTwoPi * 20 * (r.uniform() - 0.5), units::kTwoPi * 5 * r.uniform()};
        const double t = 5e-3 * r.uniform();
        worst = std::max(worst, phase_insensitive_distance(evolve_pulse(s, h.rabi, h.phase, h.delta, h.chi, t),
                                                           brute_force_oracle(s, h, t)));
        worst = std::max(worst, phase_insensitive_distance(evolve_oat(s, h.chi, h.delta, t),
                                                           brute_force_oracle(s, {0, 0, h.delta, h.chi}, t)));
        worst = std::max(worst, phase_insensitive_distance(rotate(s, {h.rabi * t, h.phase}),
                                                           brute_force_oracle(s, {h.rabi, h.phase, 0, 0}, t)));
    }
    return {worst <= kOracleTol, fmt("max distance %.2e", worst) + fmt(" over 100 draws (<= %.0e)", kOracleTol)};
}

Verdict c3() {
    const int n = 500;
    const double chi = units::kChiAt500, t = 20e-3;
    const auto m = moments(evolve_oat(make_css(n, units::kPi / 2, 0.0), chi, 0.0, t));
    const double cf = twisting_closed_form(n, chi, t).min_variance;
    const double rel = std::abs(m.min_variance / cf - 1.0);
    return {rel <= kKuRelTol, fmt("min variance %.4f", m.min_variance) + fmt(" vs closed form %.4f", cf) +
                                  fmt(", rel. error %.1e", rel) + fmt(" (<= %.0e)", kKuRelTol)};
}

Verdict c4() {
    const auto &s = fig1b();
    const double rel = db_of(s["xi2_rel"]), dir = db_of(s["xi2_direct"]), rt = s["runtime_s"].get<double>();
    const bool ok_rel = std::abs(rel - kFullRelDb) <= kFullTolDb;
    const bool ok_dir = std::abs(dir - kFullDirectDb) <= kFullTolDb;
    const bool order = dir >= rel;
    return {ok_rel && ok_dir && order && rt < kFullBudgetS,
            fmt("xi2_rel = %+.2f dB", rel) + fmt(" (%.1f +- 1)", kFullRelDb) + fmt(", xi2_direct = %+.2f dB", dir) +
                fmt(" (%.1f +- 1)", kFullDirectDb) + (order ? ", direct >= rel" : ", ORDER VIOLATED") +
                fmt(", %.0f s", rt) + fmt(" (< %.0f s)", kFullBudgetS)};
}

Verdict c5() {
    bool pass = true;
    std::string detail;
    for (const std::string target : {"fig1c", "fig2b"}) {
        const auto a = reproduce(target, opts(1)).summary, b = reproduce(target, opts(2)).summary;
        const double r2a = a["rel_fit"]["r_squared"].get<double>(), r2b = b["rel_fit"]["r_squared"].get<double>();
        const double ma = a["rel_min_alpha_deg"].get<double>(), mb = b["rel_min_alpha_deg"].get<double>();
        double d = std::abs(ma - mb);
        d = std::min(d, 180.0 - d);  // the minimum angle lives on a half circle
        pass = pass && r2a > kTomoR2 && r2b > kTomoR2 && d <= kTomoSeedTolDeg;
        detail += target + fmt(": R2 = %.3f", r2a) + fmt("/%.3f", r2b) + fmt(", min at %.1f", ma) +
                  fmt("/%.1f deg", mb) + fmt(" (dev %.1f)", d) + "; ";
    }
    return {pass, detail + fmt("need R2 > %.2f", kTomoR2) + fmt(", dev <= %.0f deg", kTomoSeedTolDeg)};
}

Verdict c6() {
    const auto s = reproduce("fig2c", opts()).summary;
    const double v = s["mean_fringe"]["visibility"].get<double>();
    return {std::abs(v - kSwapV) <= kSwapTol,
            fmt("V = %.3f", v) + fmt(" (%.2f", kSwapV) + fmt(" +- %.2f)", kSwapTol) +
                fmt(", single-shot V = %.3f", s["single_shot_fringe"]["visibility"].get<double>())};
}

Verdict c7() {
    const auto r = reproduce("fig3b", opts());
    const auto &s = r.summary;
    const double sb = s["sigma_b_342_pT"].get<double>(), anchor = s["sql_anchor_pT"].get<double>();
    const auto &t = r.tables.at(0);
    const auto enh = t.values("enhancement");
    const double v0 = s["visibility_mean_first"].get<double>(), v1 = s["visibility_mean_last"].get<double>();
    const double single = s["visibility_single_max_rel_dev"].get<double>();
    const bool ok_sb = std::abs(sb - kSigmaB342) <= kSigmaB342Tol;
    const bool ok_anchor = std::abs(anchor / kSqlAnchor - 1.0) <= kIdentityTol;
    const bool loses = enh.back() < enh.at(1) && v1 < v0;
    const bool ok_single = single <= kSingleVisTol;
    return {ok_sb && ok_anchor && loses && ok_single,
            fmt("sigma_B(342 us) = %.0f pT", sb) + fmt(" +- %.0f", s["ci_342_pT"].get<double>()) +
                fmt(" (310 +- %.0f)", kSigmaB342Tol) + fmt(", SQL anchor %.6f pT", anchor) +
                fmt(", enhancement %.2f", enh.at(1)) + fmt(" -> %.2f", enh.back()) + fmt(", V_mean %.3f", v0) +
                fmt(" -> %.3f", v1) + fmt(", single-shot V dev %.3f", single) + fmt(" (<= %.2f)", kSingleVisTol)};
}

Verdict c8() {
    const auto a = reproduce("fig4a", opts()).summary;
    const auto b = reproduce("fig4b", opts()).summary;
    const double g = a["gradient_T_per_um"].get<double>(), ge = a["gradient_err_T_per_um"].get<double>();
    const double r2 = a["noiseless_origin_r_squared"].get<double>();
    const double ex = b["single_well_exponent"].get<double>();
    const double sg = b["full_sigma_grad_pT_per_um"].get<double>(), en = b["full_enhancement"].get<double>();
    const bool ok_g = std::abs(g - kGradient) <= ge;
    const bool ok_r2 = r2 > kOriginR2;
    const bool ok_ex = std::abs(ex - kExponent) <= kExponentTol;
    const bool ok_sg = std::abs(sg - kSummedGrad) <= kSummedGradTol;
    const bool ok_en = std::abs(en - kEnhancement) <= kEnhancementTol;
    return {ok_g && ok_r2 && ok_ex && ok_sg && ok_en,
            fmt("gradient %.2f", g * 1e12) + fmt(" +- %.2f pT/um", ge * 1e12) + " (CI must hold 19.6)" +
                fmt(", noiseless R2 %.5f", r2) + fmt(", single-well exponent %.3f", ex) + " (-1 +- 0.05)" +
                fmt(", summed %.1f pT/um", sg) + " (12 +- 2)" + fmt(", enhancement %.2f", en) + " (0.24 +- 0.05)" +
                fmt(", input xi2_rel %.2f dB", b["full_xi2_rel_raw_db"].get<double>()) +
                fmt(" (enhancement predicted from it %.2f)", b["predicted_enhancement"].get<double>())};
}

Verdict c9() {
    const auto s = reproduce("supp4", opts()).summary;
    const auto &v = s["variants"];
    const double peak_alpha = v["no_echo"]["peak_alpha_deg"].get<double>();
    const double at0 = v["no_echo"]["at_0"].get<double>(), at0e = v["no_echo"]["at_0_err"].get<double>();
    const double red = s["echo_reduction"].get<double>();
    const double pe = v["echo"]["peak"].get<double>(), pp = v["echo_pulse"]["peak"].get<double>();
    const bool pass = peak_alpha == 90.0 && std::abs(at0) <= at0e && red >= kEchoReduction && pp > pe;
    return {pass, fmt("no-echo peak at %.0f deg", peak_alpha) + fmt(", beta2(0) = %.2e", at0) +
                      fmt(" +- %.2e", at0e) + fmt(", echo reduction %.1fx", red) + fmt(" (>= %.0fx)", kEchoReduction) +
                      fmt(", echo peak %.2e", pe) + fmt(" -> with pulse noise %.2e", pp)};
}

Verdict c10() {
    LossFloorOptions o;
    o.seed = kSeed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = loss_floor_scan(o).summary;
    const double rt = seconds_since(t0);
    const double db = s["min_squeezing_db"].get<double>();
    return {std::abs(db - kLossFloorDb) <= kLossFloorTol && rt < kLossBudgetS,
            fmt("min squeezing %.2f dB", db) + fmt(" +- %.2f", s["min_stderr_db"].get<double>()) +
                fmt(" at %.1f ms", 1e3 * s["t_min_s"].get<double>()) + " (-9 +- 1.5)" + fmt(", %.0f s", rt) +
                fmt(" (< %.0f s)", kLossBudgetS)};
}

Verdict c11() {
    auto csv = [](int workers) {
        RunConfig c = reference_run_config();
        c.n_shots = 12;
        c.workers = workers;
        c.noise.longterm_enabled = true;
        std::ostringstream out;
        write_shots_csv(out, simulate(c).records[0]);
        return out.str();
    };
    const auto a = csv(1), b = csv(8);
    std::istringstream in(a);
    const auto shots = read_shots_csv(in);
    auto analysis = [&](int workers) {
        return analyze_shots(shots, json{{"bootstrap", {{"resamples", 200}, {"seed", 3}, {"workers", workers}}}}).dump();
    };
    const bool same_csv = a == b, same_analysis = analysis(1) == analysis(8);
    return {same_csv && same_analysis, std::string("shot CSV ") + (same_csv ? "identical" : "DIFFERS") + " (" +
                                           std::to_string(a.size()) + " bytes), bootstrap analysis " +
                                           (same_analysis ? "identical" : "DIFFERS")};
}

Verdict c12() {
    Stream r = substream(kSeed, StreamPurpose::Test, {12});
    // Common-mode invariance: per-shot offsets added to both regions' z,
    // fixed totals, zero-mean offsets.
    const int shots = 400;
    std::vector<SitePopulation> l, rt, l2, r2;
    std::vector<double> off(shots);
    double mean = 0;
    for (auto &o : off) mean += (o = 0.05 * r.normal());
    mean /= shots;
    for (int s = 0; s < shots; ++s) {
        const double nl = 6000, nr = 6300;
        const double dl = std::sqrt(0.4 * nl) * r.normal(), dr = std::sqrt(0.4 * nr) * r.normal();
        l.push_back({0.5 * (nl - dl), 0.5 * (nl + dl)});
        rt.push_back({0.5 * (nr - dr), 0.5 * (nr + dr)});
        const double z = off[s] - mean;
        l2.push_back({l.back().n_a - 0.5 * nl * z, l.back().n_b + 0.5 * nl * z});
        r2.push_back({rt.back().n_a - 0.5 * nr * z, rt.back().n_b + 0.5 * nr * z});
    }
    const auto idx = all_indices(shots);
    const double x1 = xi2_rel_value(l, rt, idx, 0, 0), x2 = xi2_rel_value(l2, r2, idx, 0, 0);
    const double cm = std::abs(x1 / x2 - 1.0);
    // Weighted combination of the halves' direct squeezing.
    const double el = xi2_direct_value(l, idx, 0), er = xi2_direct_value(rt, idx, 0);
    const double comb = (el / 6000 + er / 6300) / (1 / 6000.0 + 1 / 6300.0);
    const auto est = bootstrap([&](const std::vector<std::size_t> &i) { return xi2_rel_value(l, rt, i, 0, 0); },
                               shots, {200, kSeed, 1});
    const bool ok_comb = std::abs(est.value - comb) <= est.std_error;
    // sigma_B / sigma_SQL = std_dz sqrt(N) / 2.
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        FieldProtocolParams p;
        p.t_hold = 1e-6 + 5e-3 * r.uniform();
        p.visibility = 0.5 + 0.5 * r.uniform();
        const double n = 1000 + 20000 * r.uniform(), sd = 0.03 * r.uniform();
        const double ratio = sensitivity(sd, p) / sql(n, p);
        worst = std::max(worst, std::abs(ratio / (sd * std::sqrt(n) / 2) - 1));
    }
    return {cm <= kIdentityTol && ok_comb && worst <= kIdentityTol,
            fmt("common-mode rel. change %.1e", cm) + fmt(", xi2_rel %.4f", est.value) +
                fmt(" +- %.4f", est.std_error) + fmt(" vs weighted halves %.4f", comb) +
                fmt(", sigma_B/sigma_SQL identity max rel. error %.1e", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"coherent-state baseline", c1},      {"oracle equivalence", c2},
        {"ideal squeezing vs closed form", c3}, {"full-model squeezing", c4},
        {"tomography sinusoid and stability", c5}, {"swap-Ramsey visibility", c6},
        {"field sensitivity vs t_int", c7},   {"gradiometry", c8},
        {"technical-noise tomography", c9},   {"loss floor", c10},
        {"determinism across workers", c11},  {"estimator algebra", c12}};

    std::set<int> only;
    if (const char *sel = std::getenv("SQUEEZEMAG_ACCEPTANCE_ONLY")) {
        std::stringstream ss(sel);
        std::string tok;
        while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
    const bool strict = std::getenv("SQUEEZEMAG_ACCEPTANCE_STRICT") != nullptr;

    int passed = 0, failed = 0, errors = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto v = criteria[i].second();
            (v.pass ? passed : failed)++;
            std::printf("[%s] %2d %s: %s [%.0f s]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                        v.detail.c_str(), seconds_since(t0));
        } catch (const std::exception &e) {
            ++errors;
            std::printf("[ERROR] %2d %s: %s\n", id, criteria[i].first.c_str(), e.what());
        }
        std::fflush(stdout);
    }
    std::printf("acceptance: %d passed, %d failed, %d errors\n", passed, failed, errors);
    if (errors) return 1;
    return strict && failed ? 1 : 0;
}
