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

#include "squeezemag/sequence.hpp"

#include <cmath>

#include "squeezemag/error.hpp"

namespace squeezemag {

using units::kPi;
using units::kTwoPi;

step::Readout step::Readout::tomography(double alpha) {
    Readout r;
    r.kind = Kind::Tomography;
    r.angle = std::abs(alpha);
    r.phase = alpha >= 0 ? 0.5 * kPi : 1.5 * kPi;
    return r;
}

step::Readout step::Readout::ramsey(double phi) {
    Readout r;
    r.kind = Kind::Ramsey;
    r.angle = 0.5 * kPi;
    r.phase = phi;
    return r;
}

namespace {

void check_duration(double d, const char *what) {
    if (!std::isfinite(d) || d < 0) throw InvalidArgument(std::string("sequence: ") + what + " must be finite and >= 0");
}

}  // namespace

void Sequence::validate() const {
    bool swapped = false;
    for (size_t i = 0; i < steps.size(); ++i) {
        const auto &s = steps[i];
        if (auto p = std::get_if<step::Pulse>(&s)) {
            check_duration(p->duration, "pulse duration");
            if (!std::isfinite(p->rabi) || p->rabi < 0) throw InvalidArgument("sequence: pulse rabi must be >= 0");
            if (!std::isfinite(p->phase)) throw InvalidArgument("sequence: pulse phase must be finite");
            if (swapped) throw InvalidArgument("sequence: pulse while swapped out");
        } else if (auto f = std::get_if<step::FreeOAT>(&s)) {
            check_duration(f->duration, "FreeOAT duration");
            if (swapped) throw InvalidArgument("sequence: FreeOAT while swapped out");
        } else if (auto o = std::get_if<step::SwapOut>(&s)) {
            check_duration(o->t_pi, "SwapOut t_pi");
            if (swapped) throw InvalidArgument("sequence: nested SwapOut");
            swapped = true;
        } else if (auto h = std::get_if<step::Hold>(&s)) {
            check_duration(h->duration, "Hold duration");
            if (!swapped) throw InvalidArgument("sequence: Hold outside SwapOut/SwapIn");
        } else if (auto in = std::get_if<step::SwapIn>(&s)) {
            check_duration(in->t_pi, "SwapIn t_pi");
            if (!swapped) throw InvalidArgument("sequence: SwapIn without SwapOut");
            swapped = false;
        } else if (auto r = std::get_if<step::Readout>(&s)) {
            if (!std::isfinite(r->angle) || r->angle < 0) throw InvalidArgument("sequence: readout angle must be >= 0");
            if (!std::isfinite(r->phase)) throw InvalidArgument("sequence: readout phase must be finite");
            if (!std::isfinite(r->rabi) || r->rabi <= 0) throw InvalidArgument("sequence: readout rabi must be > 0");
            if (swapped) throw InvalidArgument("sequence: readout while swapped out");
            if (i + 1 != steps.size()) throw InvalidArgument("sequence: readout must be the last step");
        }
    }
    if (swapped) throw InvalidArgument("sequence: SwapOut without SwapIn");
}

namespace {

step::Pulse pulse(double angle, double phase, const OatOptions &o) {
    step::Pulse p;
    p.rabi = o.rabi;
    p.phase = phase;
    p.duration = angle / o.rabi;
    p.ideal = o.ideal_pulses;
    return p;
}

void append_generation(Sequence &seq, double evolution_total, const OatOptions &o) {
    if (!(evolution_total > 0) || !std::isfinite(evolution_total)) {
        throw InvalidArgument("make_oat_sequence: evolution_total must be > 0");
    }
    if (!(o.rabi > 0)) throw InvalidArgument("make_oat_sequence: rabi must be > 0");
    seq.steps.push_back(pulse(0.5 * kPi, 0.0, o));
    if (o.echo) {
        seq.steps.push_back(step::FreeOAT{0.5 * evolution_total});
        auto echo = pulse(kPi, 1.5 * kPi, o);
        echo.echo = true;
        seq.steps.push_back(echo);
        seq.steps.push_back(step::FreeOAT{0.5 * evolution_total});
    } else {
        seq.steps.push_back(step::FreeOAT{evolution_total});
    }
}

}  // namespace

Sequence make_oat_sequence(double evolution_total, double tomography_angle, const OatOptions &options) {
    if (!std::isfinite(tomography_angle)) throw InvalidArgument("make_oat_sequence: angle must be finite");
    Sequence seq;
    seq.name = "oat";
    append_generation(seq, evolution_total, options);
    auto r = step::Readout::tomography(tomography_angle);
    r.rabi = options.rabi;
    r.ideal = options.ideal_pulses;
    seq.steps.push_back(r);
    return seq;
}

Sequence make_ramsey_sequence(double t_hold, const step::Readout &readout, const RamseyOptions &options) {
    if (!std::isfinite(t_hold) || t_hold < 0) throw InvalidArgument("make_ramsey_sequence: t_hold must be >= 0");
    Sequence seq;
    seq.name = "ramsey";
    append_generation(seq, options.evolution_total, options.oat);
    seq.steps.push_back(pulse(options.phase_squeeze_angle, 1.5 * kPi, options.oat));
    seq.steps.push_back(step::SwapOut{options.t_pi});
    seq.steps.push_back(step::Hold{t_hold});
    seq.steps.push_back(step::SwapIn{options.t_pi});
    seq.steps.push_back(readout);
    seq.validate();
    return seq;
}

double interrogation_time(const Sequence &seq) {
    double t = 0.0;
    for (const auto &s : seq.steps) {
        if (auto o = std::get_if<step::SwapOut>(&s)) t += o->t_pi;
        if (auto h = std::get_if<step::Hold>(&s)) t += h->duration;
        if (auto in = std::get_if<step::SwapIn>(&s)) t += in->t_pi;
    }
    return t;
}

double site_field(const SiteParams &site, const ProtocolParams &params) {
    return params.field_offset + params.field_gradient * (site.position_um - params.gradient_origin_um);
}

namespace {

struct Executor {
    const SiteParams &site;
    const ShotNoise &noise;
    const ProtocolParams &params;
    const ExecutionEnv &env;
    double field;  // static + shot field offset from B0, T

    double chi(int n) const {
        if (env.lattice && n != site.n_atoms) return n >= 1 ? chi_of_n(*env.lattice, n) : 0.0;
        return site.chi;
    }
    double delta(int n) const {
        if (env.lattice && n != site.n_atoms) return delta_of_n(*env.lattice, n);
        return site.delta_offset;
    }
    /// Detuning of the |a>-|b> transition from everything except the site law.
    double generation_extra() const {
        // The shot's field offset enters through noise.gen_detuning (drawn from it or
        // independently, depending on the noise mode); the static part is added here.
        return noise.gen_detuning + kTwoPi * env.gen_field_to_detuning * site_field(site, params);
    }
    double swapped_rate() const {
        return kTwoPi * (params.swap_sensitivity * field + params.swap_detuning);
    }

    CollectiveState run_pulse(const CollectiveState &s, double rabi, double lab_phase, double duration, bool ideal,
                              bool echo) const {
        if (duration == 0.0) return s;
        const double op_phase = -lab_phase;
        if (echo && params.echo_deficit > 0) {
            return rotate(s, {rabi * duration - params.echo_deficit, op_phase});
        }
        if (ideal || params.ideal_pulses) return rotate(s, {rabi * duration, op_phase});
        const int n = s.n_atoms();
        const double d = delta(n) + generation_extra() + noise.pulse_detuning;
        return evolve_pulse(s, rabi, op_phase, d, chi(n), duration);
    }

    CollectiveState swapped(const CollectiveState &s, double duration) const {
        if (duration == 0.0) return s;
        if (params.chi_hold != 0.0) return evolve_oat(s, params.chi_hold, swapped_rate(), duration);
        return rotate_z(s, swapped_rate() * duration);
    }

    CollectiveState free_oat(const CollectiveState &s, double duration) const {
        if (duration == 0.0) return s;
        const double extra = generation_extra();
        if (env.loss && env.loss->enabled && env.loss_rng) {
            if (!env.lattice) throw InvalidArgument("execute: loss requires the lattice config");
            const TwistingLaw law = twisting_law(*env.lattice, extra);
            return evolve_trajectory(s, law, loss_rates(*env.loss), duration, *env.loss_rng);
        }
        const int n = s.n_atoms();
        return evolve_oat(s, chi(n), delta(n) + extra, duration);
    }
};

}  // namespace

CollectiveState execute_from(const CollectiveState &initial, const Sequence &seq, const SiteParams &site,
                             const ShotNoise &noise, const ProtocolParams &params, const ExecutionEnv &env) {
    seq.validate();
    Executor ex{site, noise, params, env, site_field(site, params) + noise.field_offset};
    CollectiveState s = initial;
    for (const auto &st : seq.steps) {
        if (auto p = std::get_if<step::Pulse>(&st)) {
            s = ex.run_pulse(s, p->rabi, p->phase, p->duration, p->ideal, p->echo);
        } else if (auto f = std::get_if<step::FreeOAT>(&st)) {
            s = ex.free_oat(s, f->duration);
        } else if (auto o = std::get_if<step::SwapOut>(&st)) {
            // The swap itself is a relabelling b -> c; only its phase accumulation is modelled.
            s = ex.swapped(s, o->t_pi);
        } else if (auto h = std::get_if<step::Hold>(&st)) {
            s = ex.swapped(s, h->duration);
        } else if (auto in = std::get_if<step::SwapIn>(&st)) {
            s = ex.swapped(s, in->t_pi);
        } else if (auto r = std::get_if<step::Readout>(&st)) {
            s = ex.run_pulse(s, r->rabi, r->phase, r->angle / r->rabi, r->ideal, false);
        }
    }
    return s;
}

CollectiveState execute(const Sequence &seq, const SiteParams &site, const ShotNoise &noise,
                        const ProtocolParams &params, const ExecutionEnv &env) {
    if (site.n_atoms < 1) throw InvalidArgument("execute: site has no atoms");
    return execute_from(CollectiveState(site.n_atoms), seq, site, noise, params, env);
}

}  // namespace squeezemag
