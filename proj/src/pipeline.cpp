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

#include "squeezemag/pipeline.hpp"

#include <array>
#include <cmath>
#include <optional>

#include "squeezemag/error.hpp"
#include "squeezemag/parallel.hpp"

namespace squeezemag {

void RunConfig::validate() const {
    lattice.validate();
    noise.validate();
    loss.validate();
    sequence.validate();
    if (n_shots < 1) throw InvalidArgument("n_shots must be >= 1");
    if (workers < 0) throw InvalidArgument("workers must be >= 0");
    const auto &p = protocol;
    if (!(p.swap_sensitivity > 0) || !std::isfinite(p.swap_sensitivity)) {
        throw InvalidArgument("protocol.swap_sensitivity must be > 0");
    }
    for (double v : {p.field_offset, p.field_gradient, p.gradient_origin_um, p.swap_detuning, p.chi_hold}) {
        if (!std::isfinite(v)) throw InvalidArgument("protocol parameters must be finite");
    }
    if (!(p.echo_deficit >= 0) || !std::isfinite(p.echo_deficit)) {
        throw InvalidArgument("protocol.echo_deficit must be >= 0");
    }
}

std::vector<SiteParams> run_lattice(const RunConfig &config) {
    Stream rng = substream(config.master_seed, StreamPurpose::Lattice);
    return build_lattice(config.lattice, rng);
}

ShotNoise shot_noise_for(const RunConfig &config, std::int64_t shot) {
    const auto block = static_cast<std::uint64_t>(shot / config.noise.longterm_block_size);
    const double drift = draw_drift_offset(config.noise, config.master_seed, block);
    Stream rng = substream(config.master_seed, StreamPurpose::ShotNoise, {static_cast<std::uint64_t>(shot)});
    return draw_shot_noise(config.noise, rng, drift);
}

std::pair<Sequence, Sequence> split_sequence(const Sequence &seq, std::size_t index) {
    if (index > seq.steps.size()) throw InvalidArgument("split_sequence: index past the end");
    Sequence head, tail;
    head.name = seq.name + ":head";
    tail.name = seq.name + ":tail";
    head.steps.assign(seq.steps.begin(), seq.steps.begin() + static_cast<std::ptrdiff_t>(index));
    tail.steps.assign(seq.steps.begin() + static_cast<std::ptrdiff_t>(index), seq.steps.end());
    return {head, tail};
}

std::size_t tail_start(const Sequence &seq) {
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        if (std::holds_alternative<step::SwapOut>(seq.steps[i])) return i;
    }
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        if (std::holds_alternative<step::Readout>(seq.steps[i])) return i;
    }
    return seq.steps.size();
}

bool shot_invariant(const RunConfig &config) {
    const auto &n = config.noise;
    const bool field_free = n.field_sigma_shot == 0.0 && (!n.longterm_enabled || n.field_sigma_longterm == 0.0);
    const bool gen_free = n.gen_mode == GenDetuningMode::FieldDerived ? field_free : n.gen_detuning_sigma == 0.0;
    return !config.loss.enabled && field_free && gen_free && n.pulse_detuning_sigma == 0.0;
}

TailSelector round_robin(std::size_t n_tails) {
    if (n_tails == 0) throw InvalidArgument("round_robin: no tails");
    return [n_tails](std::size_t shot, std::size_t tail) { return shot % n_tails == tail; };
}

ShotBatch run_shots(const RunConfig &config, const Sequence &prefix, const std::vector<Sequence> &tails_in,
                    const TailSelector &select) {
    config.validate();
    prefix.validate();
    std::vector<Sequence> tails = tails_in;
    if (tails.empty()) tails.emplace_back();
    for (const auto &t : tails) t.validate();
    const auto n_shots = static_cast<std::size_t>(config.n_shots);
    auto chosen = [&](std::size_t shot, std::size_t v) { return !select || select(shot, v); };

    ShotBatch batch;
    batch.sites = run_lattice(config);
    const auto &sites = batch.sites;
    std::vector<std::vector<std::optional<ShotRecord>>> slots(tails.size(), std::vector<std::optional<ShotRecord>>(n_shots));

    auto evolve = [&](std::size_t shot, const ShotNoise &noise, bool every_tail) {
        std::vector<std::vector<CollectiveState>> finals(tails.size());
        for (auto &f : finals) f.reserve(sites.size());
        for (const auto &site : sites) {
            Stream loss_rng = substream(config.master_seed, StreamPurpose::Loss, {shot, static_cast<std::uint64_t>(site.site_index)});
            ExecutionEnv env{&config.lattice, &config.loss, &loss_rng, config.noise.gen_field_to_detuning};
            const CollectiveState mid = execute(prefix, site, noise, config.protocol, env);
            for (std::size_t v = 0; v < tails.size(); ++v) {
                if (!every_tail && !chosen(shot, v)) continue;
                finals[v].push_back(tails[v].steps.empty() ? mid
                                                            : execute_from(mid, tails[v], site, noise, config.protocol, env));
            }
        }
        return finals;
    };
    // Without technical noise or loss every shot ends in the same states.
    std::vector<std::vector<CollectiveState>> shared;
    if (shot_invariant(config)) shared = evolve(0, ShotNoise{}, true);

    parallel_for(n_shots, config.workers, [&](std::size_t shot) {
        const ShotNoise noise = shot_noise_for(config, static_cast<std::int64_t>(shot));
        std::vector<std::vector<CollectiveState>> own;
        if (shared.empty()) own = evolve(shot, noise, false);
        const auto &finals = shared.empty() ? own : shared;
        for (std::size_t v = 0; v < tails.size(); ++v) {
            if (!chosen(shot, v)) continue;
            Stream mrng = substream(config.master_seed, StreamPurpose::Measurement, {shot, v});
            ShotRecord rec = measure_shot(finals[v], config.noise, mrng);
            rec.run_id = config.run_id;
            rec.shot_index = static_cast<std::int64_t>(shot);
            rec.noise = noise;
            slots[v][shot] = std::move(rec);
        }
    });
    batch.records.resize(tails.size());
    for (std::size_t v = 0; v < tails.size(); ++v) {
        for (auto &r : slots[v]) {
            if (r) batch.records[v].push_back(std::move(*r));
        }
    }
    return batch;
}

namespace {

Sequence with_calibrated_readout(const RunConfig &config) {
    Sequence seq = config.sequence;
    if (seq.steps.empty()) return seq;
    auto *r = std::get_if<step::Readout>(&seq.steps.back());
    if (!r || r->kind != step::Readout::Kind::Tomography) return seq;
    auto [generation, tail] = split_sequence(seq, seq.steps.size() - 1);
    const double alpha = calibrate_tomography_angle(config, generation);
    auto fresh = step::Readout::tomography(alpha);
    fresh.rabi = r->rabi;
    fresh.ideal = r->ideal;
    *r = fresh;
    return seq;
}

}  // namespace

ShotBatch simulate(const RunConfig &config) {
    config.validate();
    const Sequence seq = config.calibrate_readout ? with_calibrated_readout(config) : config.sequence;
    return run_shots(config, seq, {});
}

std::vector<CollectiveState> noiseless_states(const RunConfig &config, const Sequence &seq) {
    const auto sites = run_lattice(config);
    std::vector<CollectiveState> out;
    out.reserve(sites.size());
    ExecutionEnv env;
    env.lattice = &config.lattice;
    env.gen_field_to_detuning = config.noise.gen_field_to_detuning;
    for (const auto &site : sites) out.push_back(execute(seq, site, ShotNoise{}, config.protocol, env));
    return out;
}

double calibrate_tomography_angle(const RunConfig &config, const Sequence &generation) {
    const auto sites = run_lattice(config);
    ExecutionEnv env;
    env.lattice = &config.lattice;
    env.gen_field_to_detuning = config.noise.gen_field_to_detuning;
    std::vector<CollectiveState> states;
    std::array<std::array<double, 3>, 3> c{};
    for (const auto &site : sites) {
        states.push_back(execute(generation, site, ShotNoise{}, config.protocol, env));
        const auto m = moments(states.back());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c[i][j] += m.cov[i][j];
    }
    // An ideal tomography rotation by alpha measures J . (sin alpha, 0, cos alpha):
    // f(alpha) = (Cxx + Czz)/2 + (Czz - Cxx)/2 cos 2alpha + Cxz sin 2alpha.
    double alpha = 0.5 * std::atan2(-c[0][2], -0.5 * (c[2][2] - c[0][0]));

    // Refine with the readout pulse the run will actually apply.
    step::Readout proto;
    if (!config.sequence.steps.empty()) {
        if (auto r = std::get_if<step::Readout>(&config.sequence.steps.back())) proto = *r;
    }
    auto cost = [&](double a) {
        auto r = step::Readout::tomography(a);
        r.rabi = proto.rabi;
        r.ideal = proto.ideal;
        Sequence tail;
        tail.steps.push_back(r);
        double total = 0.0;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            total += moments(execute_from(states[i], tail, sites[i], ShotNoise{}, config.protocol, env)).var_jz();
        }
        return total;
    };
    const double width = units::deg_to_rad(6.0);
    double lo = alpha - width, hi = alpha + width;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = cost(x1), f2 = cost(x2);
    while (hi - lo > 1e-4) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace squeezemag
