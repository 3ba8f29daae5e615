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

#include "squeezemag/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "squeezemag/error.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

using nlohmann::json;
namespace fs = std::filesystem;
using units::kTwoPi;

namespace {

// Walks one JSON object, remembering which keys were consumed.
class Reader {
   public:
    Reader(const json &j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_, "expected an object");
    }

    template <typename T>
    void get(const std::string &key, T &out) {
        used_.insert(key);
        if (!j_.contains(key)) return;
        out = as<T>(j_.at(key), path(key));
    }

    bool has(const std::string &key) const { return j_.contains(key); }
    const json &raw(const std::string &key) {
        used_.insert(key);
        return j_.at(key);
    }
    std::string path(const std::string &key) const { return where_.empty() ? key : where_ + "." + key; }

    void finish() const {
        for (const auto &[k, v] : j_.items()) {
            if (!used_.count(k)) throw ConfigError(path(k), "unknown key");
        }
    }

    template <typename T>
    static T as(const json &v, const std::string &where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where, "expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return v.get<T>();
                if (v.get<long long>() < 0) throw ConfigError(where, "expected a non-negative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(where, "expected a number");
            return v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where, "expected a string");
            return v.get<std::string>();
        } else {
            if (!v.is_array()) throw ConfigError(where, "expected an array");
            T out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                out.push_back(as<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
            }
            return out;
        }
    }

   private:
    const json &j_;
    std::string where_;
    std::set<std::string> used_;
};

// Reads a value stored in one unit into a field held in another.
void get_scaled(Reader &r, const std::string &key, double &field, double scale) {
    double v = field / scale;
    r.get(key, v);
    field = v * scale;
}

const char *law_name(AtomNumberLaw::Kind k) {
    switch (k) {
        case AtomNumberLaw::Kind::Uniform: return "uniform";
        case AtomNumberLaw::Kind::StratifiedUniform: return "stratified";
        case AtomNumberLaw::Kind::Constant: return "constant";
        case AtomNumberLaw::Kind::Fixed: return "fixed";
    }
    return "uniform";
}

AtomNumberLaw::Kind law_kind(const std::string &s, const std::string &where) {
    if (s == "uniform") return AtomNumberLaw::Kind::Uniform;
    if (s == "stratified") return AtomNumberLaw::Kind::StratifiedUniform;
    if (s == "constant") return AtomNumberLaw::Kind::Constant;
    if (s == "fixed") return AtomNumberLaw::Kind::Fixed;
    throw ConfigError(where, "unknown atom number law '" + s + "' (uniform, stratified, constant, fixed)");
}

constexpr double kDeg = units::kPi / 180.0;

json step_to_json(const SequenceStep &s) {
    return std::visit(
        [](const auto &x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, step::Pulse>) {
                return {{"type", "pulse"},        {"rabi_hz", x.rabi / kTwoPi}, {"phase_deg", x.phase / kDeg},
                        {"duration_s", x.duration}, {"ideal", x.ideal},         {"echo", x.echo}};
            } else if constexpr (std::is_same_v<T, step::FreeOAT>) {
                return {{"type", "free_oat"}, {"duration_s", x.duration}};
            } else if constexpr (std::is_same_v<T, step::SwapOut>) {
                return {{"type", "swap_out"}, {"t_pi_s", x.t_pi}};
            } else if constexpr (std::is_same_v<T, step::Hold>) {
                return {{"type", "hold"}, {"duration_s", x.duration}};
            } else if constexpr (std::is_same_v<T, step::SwapIn>) {
                return {{"type", "swap_in"}, {"t_pi_s", x.t_pi}};
            } else {
                return {{"type", "readout"},
                        {"kind", x.kind == step::Readout::Kind::Ramsey ? "ramsey" : "tomography"},
                        {"angle_deg", x.angle / kDeg},
                        {"phase_deg", x.phase / kDeg},
                        {"rabi_hz", x.rabi / kTwoPi},
                        {"ideal", x.ideal}};
            }
        },
        s);
}

SequenceStep step_from_json(const json &j, const std::string &where) {
    Reader r(j, where);
    std::string type;
    r.get("type", type);
    SequenceStep out;
    if (type == "pulse") {
        step::Pulse p;
        get_scaled(r, "rabi_hz", p.rabi, kTwoPi);
        get_scaled(r, "phase_deg", p.phase, kDeg);
        r.get("duration_s", p.duration);
        if (r.has("angle_deg")) {
            double a = 0.0;
            r.get("angle_deg", a);
            p.duration = a * kDeg / p.rabi;
        }
        r.get("ideal", p.ideal);
        r.get("echo", p.echo);
        out = p;
    } else if (type == "free_oat") {
        step::FreeOAT p;
        r.get("duration_s", p.duration);
        out = p;
    } else if (type == "swap_out") {
        step::SwapOut p;
        r.get("t_pi_s", p.t_pi);
        out = p;
    } else if (type == "hold") {
        step::Hold p;
        r.get("duration_s", p.duration);
        out = p;
    } else if (type == "swap_in") {
        step::SwapIn p;
        r.get("t_pi_s", p.t_pi);
        out = p;
    } else if (type == "readout") {
        std::string kind = "tomography";
        r.get("kind", kind);
        step::Readout p;
        if (kind == "tomography") {
            double alpha = 0.0;
            r.get("alpha_deg", alpha);
            p = step::Readout::tomography(alpha * kDeg);
        } else if (kind == "ramsey") {
            p = step::Readout::ramsey(0.0);
        } else {
            throw ConfigError(r.path("kind"), "expected tomography or ramsey");
        }
        get_scaled(r, "angle_deg", p.angle, kDeg);
        get_scaled(r, "phase_deg", p.phase, kDeg);
        get_scaled(r, "rabi_hz", p.rabi, kTwoPi);
        r.get("ideal", p.ideal);
        out = p;
    } else {
        throw ConfigError(r.path("type"),
                          "unknown step type '" + type + "' (pulse, free_oat, swap_out, hold, swap_in, readout)");
    }
    r.finish();
    return out;
}

}  // namespace

json sequence_to_json(const Sequence &seq) {
    json steps = json::array();
    for (const auto &s : seq.steps) steps.push_back(step_to_json(s));
    return {{"name", seq.name}, {"steps", steps}};
}

Sequence sequence_from_json(const json &j, const std::string &where) {
    Reader r(j, where);
    if (r.has("preset")) {
        std::string preset;
        r.get("preset", preset);
        OatOptions oat;
        r.get("echo", oat.echo);
        r.get("ideal_pulses", oat.ideal_pulses);
        get_scaled(r, "rabi_hz", oat.rabi, kTwoPi);
        double total = 20e-3;
        r.get("evolution_total_s", total);
        Sequence seq;
        if (preset == "oat") {
            double alpha = 0.0;
            r.get("tomography_angle_deg", alpha);
            seq = make_oat_sequence(total, alpha * kDeg, oat);
        } else if (preset == "css") {
            seq = make_css_sequence(oat);
        } else if (preset == "ramsey") {
            RamseyOptions ro;
            ro.oat = oat;
            ro.evolution_total = total;
            get_scaled(r, "phase_squeeze_angle_deg", ro.phase_squeeze_angle, kDeg);
            r.get("t_pi_s", ro.t_pi);
            double t_hold = 1e-6, phase = -90.0;
            r.get("t_hold_s", t_hold);
            r.get("readout_phase_deg", phase);
            seq = ramsey_with_phase(t_hold, phase * kDeg, ro);
        } else {
            throw ConfigError(r.path("preset"), "unknown preset '" + preset + "' (oat, css, ramsey)");
        }
        r.finish();
        return seq;
    }
    Sequence seq;
    r.get("name", seq.name);
    if (r.has("steps")) {
        const auto &steps = r.raw("steps");
        if (!steps.is_array()) throw ConfigError(r.path("steps"), "expected an array");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            seq.steps.push_back(step_from_json(steps[i], r.path("steps") + "[" + std::to_string(i) + "]"));
        }
    }
    r.finish();
    return seq;
}

json config_to_json(const RunConfig &c) {
    const auto &l = c.lattice;
    const auto &n = c.noise;
    const auto &p = c.protocol;
    return {
        {"n_shots", c.n_shots},
        {"master_seed", c.master_seed},
        {"run_id", c.run_id},
        {"workers", c.workers},
        {"calibrate_readout", c.calibrate_readout},
        {"lattice",
         {{"n_sites", l.n_sites},
          {"atom_number_law",
           {{"kind", law_name(l.atom_number_law.kind)},
            {"min", l.atom_number_law.min},
            {"max", l.atom_number_law.max},
            {"values", l.atom_number_law.values}}},
          {"chi_ref_hz", l.chi_ref / kTwoPi},
          {"delta0_hz", l.delta0 / kTwoPi},
          {"delta_slope_hz", l.delta_slope / kTwoPi},
          {"spacing_um", l.spacing_um}}},
        {"noise",
         {{"field_sigma_shot_T", n.field_sigma_shot},
          {"field_sigma_longterm_T", n.field_sigma_longterm},
          {"longterm_enabled", n.longterm_enabled},
          {"longterm_block_size", n.longterm_block_size},
          {"gen_field_to_detuning_hz_per_T", n.gen_field_to_detuning},
          {"swap_sensitivity_ratio", n.swap_sensitivity_ratio},
          {"pulse_detuning_sigma_hz", n.pulse_detuning_sigma},
          {"gen_detuning_sigma_hz", n.gen_detuning_sigma},
          {"gen_mode", n.gen_mode == GenDetuningMode::Direct ? "direct" : "field_derived"},
          {"detection_sigma", n.detection_sigma}}},
        {"loss",
         {{"enabled", c.loss.enabled},
          {"two_body_relax_timescale_s", c.loss.two_body_relax_timescale},
          {"feshbach_timescale_s", c.loss.feshbach_timescale},
          {"policy", c.loss.policy == LossPolicy::SymmetricOneBody ? "symmetric" : "b_only"},
          {"pair_reference_atoms", c.loss.pair_reference_atoms},
          {"n_trajectories", c.loss.n_trajectories}}},
        {"protocol",
         {{"swap_sensitivity_hz_per_T", p.swap_sensitivity},
          {"field_offset_T", p.field_offset},
          {"field_gradient_T_per_um", p.field_gradient},
          {"gradient_origin_um", p.gradient_origin_um},
          {"swap_detuning_hz", p.swap_detuning},
          {"chi_hold_hz", p.chi_hold / kTwoPi},
          {"ideal_pulses", p.ideal_pulses},
          {"echo_deficit_deg", p.echo_deficit / kDeg}}},
        {"sequence", sequence_to_json(c.sequence)},
    };
}

RunConfig config_from_json(const json &j) {
    RunConfig c;
    Reader r(j, "");
    r.get("n_shots", c.n_shots);
    r.get("master_seed", c.master_seed);
    r.get("run_id", c.run_id);
    r.get("workers", c.workers);
    r.get("calibrate_readout", c.calibrate_readout);
    r.get("output_dir", c.output_dir);
    if (r.has("lattice")) {
        Reader l(r.raw("lattice"), "lattice");
        l.get("n_sites", c.lattice.n_sites);
        if (l.has("atom_number_law")) {
            Reader a(l.raw("atom_number_law"), "lattice.atom_number_law");
            std::string kind = law_name(c.lattice.atom_number_law.kind);
            a.get("kind", kind);
            c.lattice.atom_number_law.kind = law_kind(kind, a.path("kind"));
            a.get("min", c.lattice.atom_number_law.min);
            a.get("max", c.lattice.atom_number_law.max);
            a.get("values", c.lattice.atom_number_law.values);
            a.finish();
        }
        get_scaled(l, "chi_ref_hz", c.lattice.chi_ref, kTwoPi);
        get_scaled(l, "delta0_hz", c.lattice.delta0, kTwoPi);
        get_scaled(l, "delta_slope_hz", c.lattice.delta_slope, kTwoPi);
        l.get("spacing_um", c.lattice.spacing_um);
        l.finish();
    }
    if (r.has("noise")) {
        Reader n(r.raw("noise"), "noise");
        auto &x = c.noise;
        n.get("field_sigma_shot_T", x.field_sigma_shot);
        n.get("field_sigma_longterm_T", x.field_sigma_longterm);
        n.get("longterm_enabled", x.longterm_enabled);
        n.get("longterm_block_size", x.longterm_block_size);
        n.get("gen_field_to_detuning_hz_per_T", x.gen_field_to_detuning);
        n.get("swap_sensitivity_ratio", x.swap_sensitivity_ratio);
        n.get("pulse_detuning_sigma_hz", x.pulse_detuning_sigma);
        n.get("gen_detuning_sigma_hz", x.gen_detuning_sigma);
        std::string mode = x.gen_mode == GenDetuningMode::Direct ? "direct" : "field_derived";
        n.get("gen_mode", mode);
        if (mode == "direct") {
            x.gen_mode = GenDetuningMode::Direct;
        } else if (mode == "field_derived") {
            x.gen_mode = GenDetuningMode::FieldDerived;
        } else {
            throw ConfigError(n.path("gen_mode"), "expected direct or field_derived");
        }
        n.get("detection_sigma", x.detection_sigma);
        n.finish();
    }
    if (r.has("loss")) {
        Reader l(r.raw("loss"), "loss");
        l.get("enabled", c.loss.enabled);
        l.get("two_body_relax_timescale_s", c.loss.two_body_relax_timescale);
        l.get("feshbach_timescale_s", c.loss.feshbach_timescale);
        std::string policy = c.loss.policy == LossPolicy::SymmetricOneBody ? "symmetric" : "b_only";
        l.get("policy", policy);
        if (policy == "symmetric") {
            c.loss.policy = LossPolicy::SymmetricOneBody;
        } else if (policy == "b_only") {
            c.loss.policy = LossPolicy::BOnlyOneBody;
        } else {
            throw ConfigError(l.path("policy"), "expected symmetric or b_only");
        }
        l.get("pair_reference_atoms", c.loss.pair_reference_atoms);
        l.get("n_trajectories", c.loss.n_trajectories);
        l.finish();
    }
    if (r.has("protocol")) {
        Reader p(r.raw("protocol"), "protocol");
        auto &x = c.protocol;
        p.get("swap_sensitivity_hz_per_T", x.swap_sensitivity);
        p.get("field_offset_T", x.field_offset);
        p.get("field_gradient_T_per_um", x.field_gradient);
        p.get("gradient_origin_um", x.gradient_origin_um);
        p.get("swap_detuning_hz", x.swap_detuning);
        get_scaled(p, "chi_hold_hz", x.chi_hold, kTwoPi);
        p.get("ideal_pulses", x.ideal_pulses);
        get_scaled(p, "echo_deficit_deg", x.echo_deficit, kDeg);
        p.finish();
    }
    if (r.has("sequence")) {
        c.sequence = sequence_from_json(r.raw("sequence"), "sequence");
    } else {
        c.sequence = make_oat_sequence(20e-3, 0.0);
    }
    r.finish();
    try {
        c.validate();
    } catch (const InvalidArgument &e) {
        throw ConfigError("config", e.what());
    }
    return c;
}

RunConfig parse_config(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError("", std::string("JSON syntax: ") + e.what());
    }
    return config_from_json(j);
}

RunConfig load_config(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError &e) {
        throw ConfigError(path.string(), e.what());
    }
}

// ---------------------------------------------------------------------------

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_shots_csv(std::ostream &out, const std::vector<ShotRecord> &shots) {
    out << kShotCsvHeader << '\n';
    for (const auto &s : shots) {
        for (std::size_t i = 0; i < s.sites.size(); ++i) {
            const auto &c = s.sites[i];
            out << s.run_id << ',' << s.shot_index << ',' << i << ',' << c.n_a_true << ',' << c.n_b_true << ','
                << format_double(c.n_a_det) << ',' << format_double(c.n_b_det) << '\n';
        }
    }
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

template <typename T>
T parse_field(const std::string &s, long row, const char *column) {
    T v{};
    const auto *end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != end) {
        throw SchemaError(row, std::string("column ") + column + ": cannot parse '" + s + "'");
    }
    return v;
}

}  // namespace

std::vector<ShotRecord> read_shots_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kShotCsvHeader) throw SchemaError(1, "header must be '" + std::string(kShotCsvHeader) + "'");
    std::vector<ShotRecord> shots;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 7) throw SchemaError(row, "expected 7 columns, got " + std::to_string(f.size()));
        const auto run = parse_field<std::uint64_t>(f[0], row, "run_id");
        const auto shot = parse_field<std::int64_t>(f[1], row, "shot");
        const auto site = parse_field<long>(f[2], row, "site");
        SiteCounts c;
        c.n_a_true = parse_field<int>(f[3], row, "n_a_true");
        c.n_b_true = parse_field<int>(f[4], row, "n_b_true");
        c.n_a_det = parse_field<double>(f[5], row, "n_a_det");
        c.n_b_det = parse_field<double>(f[6], row, "n_b_det");
        if (c.n_a_true < 0 || c.n_b_true < 0) throw SchemaError(row, "negative true count");
        if (shots.empty() || shots.back().run_id != run || shots.back().shot_index != shot) {
            if (site != 0) throw SchemaError(row, "a shot must start at site 0");
            if (!shots.empty() && shots.back().sites.size() != shots.front().sites.size()) {
                throw SchemaError(row, "previous shot has a different number of sites");
            }
            ShotRecord r;
            r.run_id = run;
            r.shot_index = shot;
            shots.push_back(std::move(r));
        } else if (site != static_cast<long>(shots.back().sites.size())) {
            throw SchemaError(row, "sites must be consecutive");
        }
        shots.back().sites.push_back(c);
    }
    if (shots.size() > 1 && shots.back().sites.size() != shots.front().sites.size()) {
        throw SchemaError(row, "last shot has a different number of sites");
    }
    return shots;
}

void write_noise_csv(std::ostream &out, const std::vector<ShotRecord> &shots) {
    out << "shot,field_offset_T,drift_offset_T,gen_detuning_hz,pulse_detuning_hz\n";
    for (const auto &s : shots) {
        out << s.shot_index << ',' << format_double(s.noise.field_offset) << ','
            << format_double(s.noise.drift_offset) << ',' << format_double(s.noise.gen_detuning / kTwoPi) << ','
            << format_double(s.noise.pulse_detuning / kTwoPi) << '\n';
    }
}

// ---------------------------------------------------------------------------

json analyze_shots(const std::vector<ShotRecord> &shots, const json &spec) {
    if (shots.empty()) throw InsufficientData("analyze: no shots");
    const int n_sites = static_cast<int>(shots.front().sites.size());
    Reader r(spec, "analysis");
    std::vector<std::string> estimators{"xi2_direct", "xi2_rel", "dz"};
    r.get("estimators", estimators);
    const auto halves = split_halves(n_sites);
    Region left = halves.regions[0], right = halves.regions[1], region;
    for (int i = 0; i < n_sites; ++i) region.push_back(i);
    r.get("left", left);
    r.get("right", right);
    r.get("region", region);
    double sigma = NoiseConfig{}.detection_sigma;
    r.get("detection_sigma", sigma);
    BootstrapOptions boot{200, 0, 1};
    if (r.has("bootstrap")) {
        Reader b(r.raw("bootstrap"), "analysis.bootstrap");
        b.get("resamples", boot.n_resamples);
        b.get("seed", boot.seed);
        b.get("workers", boot.workers);
        b.finish();
    }
    r.finish();
    try {
        RegionSpec{{left, right}}.validate(n_sites);
        RegionSpec{{region}}.validate(n_sites);
    } catch (const InvalidArgument &e) {
        throw ConfigError("analysis", e.what());
    }
    auto est = [](const EstimateResult &e) {
        return json{{"value", e.value},
                    {"std_error", e.std_error},
                    {"ci_low", e.ci_low},
                    {"ci_high", e.ci_high},
                    {"db", units::to_db(e.value)},
                    {"n_shots", e.n_shots},
                    {"negative_variance", e.negative_variance}};
    };
    json out = json::object();
    for (const auto &name : estimators) {
        if (name == "xi2_direct") {
            out[name] = est(xi2_direct(shots, region, sigma, boot));
        } else if (name == "xi2_rel") {
            out[name] = est(xi2_rel(shots, left, right, sigma, boot));
        } else if (name == "dz") {
            std::vector<double> dz;
            for (const auto &s : shots) {
                const auto p = s.detected();
                dz.push_back(imbalance(sum_region(p, left)) - imbalance(sum_region(p, right)));
            }
            const auto idx = all_indices(dz.size());
            out[name] = {{"mean", sample_mean(dz, idx)}, {"std", std::sqrt(sample_variance(dz, idx))}};
        } else {
            throw ConfigError("analysis.estimators", "unknown estimator '" + name + "' (xi2_direct, xi2_rel, dz)");
        }
    }
    out["n_shots"] = shots.size();
    out["n_sites"] = n_sites;
    return out;
}

// ---------------------------------------------------------------------------

std::string sha256_hex(const std::string &data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) {
        throw NumericalFailure("sha256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string sha256_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

json Manifest::to_json() const {
    json files_json = json::array();
    for (const auto &f : files) files_json.push_back({{"file", f.file}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"command", command},   {"config_hash", config_hash}, {"version", version},      {"started", started},
            {"finished", finished}, {"seed", seed},               {"files", files_json}};
}

void Manifest::add(const fs::path &dir, const std::string &file) {
    const auto p = dir / file;
    files.push_back({file, sha256_file(p), fs::file_size(p)});
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json(const fs::path &path, const json &j) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

void write_table_csv(std::ostream &out, const Table &table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
}

namespace {

std::string escape_xml(const std::string &s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            default: o += c;
        }
    }
    return o;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

std::string render_svg(const PlotSpec &spec, const Table &table) {
    const double w = 640, h = 420, ml = 80, mr = 150, mt = 40, mb = 60;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    auto usable = [](double v, bool log) { return std::isfinite(v) && (!log || v > 0); };

    const auto xs = table.values(spec.x);
    std::vector<std::vector<double>> ys;
    for (const auto &c : spec.ys) ys.push_back(table.values(c));
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!usable(xs[i], spec.log_x) || !usable(ys[k][i], spec.log_y)) continue;
            x0 = std::min(x0, tx(xs[i]));
            x1 = std::max(x1, tx(xs[i]));
            y0 = std::min(y0, ty(ys[k][i]));
            y1 = std::max(y1, ty(ys[k][i]));
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream o;
    o << std::setprecision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(spec.title)
      << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
        const double sx = ml + pw * i / 4.0, sy = mt + ph - ph * i / 4.0;
        o << "<text x=\"" << sx << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
          << tick_label(spec.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
          << tick_label(spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
        o << "<line x1=\"" << ml << "\" x2=\"" << ml + pw << "\" y1=\"" << sy << "\" y2=\"" << sy
          << "\" stroke=\"#ddd\"/>\n";
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 16 << "\" text-anchor=\"middle\">" << escape_xml(spec.x_label)
      << "</text>\n";
    o << "<text transform=\"translate(18," << mt + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(spec.y_label) << "</text>\n";

    // Many points per x (scatter data) are drawn as dots only.
    const bool scatter = xs.size() > 60;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const char *col = colors[k % 6];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (usable(xs[i], spec.log_x) && usable(ys[k][i], spec.log_y)) pts.emplace_back(px(xs[i]), py(ys[k][i]));
        }
        if (!scatter && pts.size() > 1) {
            o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
            for (const auto &[a, b] : pts) o << a << ',' << b << ' ';
            o << "\"/>\n";
        }
        for (const auto &[a, b] : pts) {
            o << "<circle cx=\"" << a << "\" cy=\"" << b << "\" r=\"" << (scatter ? 1.5 : 3) << "\" fill=\"" << col
              << "\"/>\n";
        }
        o << "<rect x=\"" << ml + pw + 12 << "\" y=\"" << mt + 18 * k << "\" width=\"10\" height=\"10\" fill=\"" << col
          << "\"/><text x=\"" << ml + pw + 26 << "\" y=\"" << mt + 18 * k + 9 << "\">" << escape_xml(spec.ys[k])
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::vector<std::string> write_figure(const fs::path &dir, const FigureResult &result) {
    fs::create_directories(dir);
    std::vector<std::string> files;
    for (const auto &t : result.tables) {
        const std::string name = t.name + ".csv";
        std::ofstream out(dir / name);
        if (!out) throw InvalidArgument("cannot write " + (dir / name).string());
        write_table_csv(out, t);
        files.push_back(name);
    }
    for (const auto &p : result.plots) {
        std::ofstream out(dir / p.file);
        if (!out) throw InvalidArgument("cannot write " + (dir / p.file).string());
        out << render_svg(p, result.table(p.table));
        files.push_back(p.file);
    }
    write_json(dir / "summary.json", result.summary);
    files.push_back("summary.json");
    return files;
}

}  // namespace squeezemag
