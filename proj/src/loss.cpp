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

#include "squeezemag/loss.hpp"

#include <algorithm>
#include <cmath>

#include "squeezemag/error.hpp"
#include "squeezemag/parallel.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

void LossConfig::validate() const {
    if (!(two_body_relax_timescale > 0)) throw InvalidArgument("loss.two_body_relax_timescale must be > 0");
    if (!(feshbach_timescale > 0)) throw InvalidArgument("loss.feshbach_timescale must be > 0");
    if (pair_reference_atoms < 2) throw InvalidArgument("loss.pair_reference_atoms must be >= 2");
    if (n_trajectories < 1) throw InvalidArgument("loss.n_trajectories must be >= 1");
}

LossRates loss_rates(const LossConfig &config) {
    config.validate();
    LossRates r;
    if (!config.enabled) return r;
    const double one_body = 1.0 / config.feshbach_timescale;
    r.gamma_b = one_body;
    r.gamma_a = config.policy == LossPolicy::SymmetricOneBody ? one_body : 0.0;
    // dN_b/dt = -2 kappa N_b^2 gives an initial 1/e rate of 1/tau at N_b = N_ref / 2.
    const double nb_ref = 0.5 * config.pair_reference_atoms;
    r.kappa_bb = 1.0 / (2.0 * config.two_body_relax_timescale * nb_ref);
    return r;
}

TwistingLaw twisting_law(const LatticeConfig &config, double extra_delta) {
    TwistingLaw law;
    law.chi = [config](int n) { return n >= 1 ? chi_of_n(config, n) : 0.0; };
    law.delta = [config, extra_delta](int n) { return delta_of_n(config, n) + extra_delta; };
    return law;
}

namespace {

struct Segment {
    int n;
    std::vector<cdouble> c;
    std::vector<double> gamma;  // total decay rate of each Dicke level
    std::vector<double> phase_rate;
    double gmax = 0.0;

    void refresh(const TwistingLaw &law, const LossRates &r) {
        const double chi = law.chi(n), delta = law.delta(n);
        gamma.resize(n + 1);
        phase_rate.resize(n + 1);
        gmax = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double m = k - 0.5 * n;
            phase_rate[k] = chi * m * m + delta * m;
            gamma[k] = r.gamma_a * (n - k) + r.gamma_b * k + r.kappa_bb * k * (k - 1.0);
            if (std::norm(c[k]) > 0.0) gmax = std::max(gmax, gamma[k]);
        }
    }

    void drift(double s) {
        for (int k = 0; k <= n; ++k) {
            c[k] *= std::exp(cdouble(-0.5 * gamma[k] * s, -phase_rate[k] * s));
        }
    }

    void normalise() {
        double nn = 0.0;
        for (const auto &x : c) nn += std::norm(x);
        const double inv = 1.0 / std::sqrt(nn);
        for (auto &x : c) x *= inv;
    }
};

}  // namespace

CollectiveState evolve_trajectory(const CollectiveState &state, const TwistingLaw &law, const LossRates &rates,
                                  double t, Stream &rng, std::vector<JumpEvent> *events) {
    if (!(t >= 0) || !std::isfinite(t)) throw InvalidArgument("evolve_trajectory: t must be >= 0");
    if (t == 0.0) return state;
    Segment seg{state.n_atoms(), state.amplitudes(), {}, {}, 0.0};
    seg.refresh(law, rates);
    double elapsed = 0.0;
    while (true) {
        if (seg.gmax <= 0.0) {
            seg.drift(t - elapsed);
            break;
        }
        // Thinning: candidate times at the bound rate, accepted with R(s)/gmax.
        double s = 0.0;
        bool jumped = false;
        while (true) {
            s += rng.exponential(seg.gmax);
            if (elapsed + s >= t) break;
            double w = 0.0, wr = 0.0;
            for (int k = 0; k <= seg.n; ++k) {
                const double p = std::norm(seg.c[k]) * std::exp(-seg.gamma[k] * s);
                w += p;
                wr += p * seg.gamma[k];
            }
            const double rate = wr / w;
            if (rng.uniform() * seg.gmax < rate) {
                jumped = true;
                break;
            }
        }
        if (!jumped) {
            seg.drift(t - elapsed);
            break;
        }
        seg.drift(s);
        elapsed += s;
        seg.normalise();
        // Channel weights <L^dag L> per channel.
        double wa = 0.0, wb = 0.0, wbb = 0.0;
        for (int k = 0; k <= seg.n; ++k) {
            const double p = std::norm(seg.c[k]);
            wa += rates.gamma_a * (seg.n - k) * p;
            wb += rates.gamma_b * k * p;
            wbb += rates.kappa_bb * k * (k - 1.0) * p;
        }
        const double u = rng.uniform() * (wa + wb + wbb);
        LossChannel ch = u < wa ? LossChannel::OneBodyA : (u < wa + wb ? LossChannel::OneBodyB : LossChannel::PairB);
        const int n = seg.n;
        std::vector<cdouble> next;
        switch (ch) {
            case LossChannel::OneBodyA:  // a|n_a, n_b> = sqrt(n_a)|n_a - 1, n_b>, k unchanged
                next.assign(n, 0.0);
                for (int k = 0; k < n; ++k) next[k] = std::sqrt(static_cast<double>(n - k)) * seg.c[k];
                seg.n = n - 1;
                break;
            case LossChannel::OneBodyB:  // k -> k - 1
                next.assign(n, 0.0);
                for (int k = 1; k <= n; ++k) next[k - 1] = std::sqrt(static_cast<double>(k)) * seg.c[k];
                seg.n = n - 1;
                break;
            case LossChannel::PairB:  // k -> k - 2
                next.assign(n - 1, 0.0);
                for (int k = 2; k <= n; ++k) next[k - 2] = std::sqrt(static_cast<double>(k) * (k - 1)) * seg.c[k];
                seg.n = n - 2;
                break;
        }
        seg.c.swap(next);
        seg.normalise();
        if (events) events->push_back({elapsed, ch, seg.n});
        seg.refresh(law, rates);
    }
    seg.normalise();
    return CollectiveState(seg.n, std::move(seg.c));
}

std::vector<LossScanPoint> evolve_with_loss(const CollectiveState &initial, const TwistingLaw &law,
                                            const LossConfig &loss, const std::vector<double> &times,
                                            const LossScanOptions &options) {
    if (options.n_trajectories < 1) throw InvalidArgument("evolve_with_loss: n_trajectories must be >= 1");
    if (options.n_batches < 1) throw InvalidArgument("evolve_with_loss: n_batches must be >= 1");
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0) || (i > 0 && times[i] < times[i - 1])) {
            throw InvalidArgument("evolve_with_loss: times must be ascending and >= 0");
        }
    }
    const LossRates rates = loss_rates(loss);
    const size_t n_traj = static_cast<size_t>(options.n_trajectories);
    std::vector<std::vector<RawMoments>> per_traj(n_traj);
    parallel_for(n_traj, options.workers, [&](size_t i) {
        Stream rng = substream(options.seed, StreamPurpose::Trajectory, {i});
        CollectiveState state = initial;
        double t_prev = 0.0;
        auto &out = per_traj[i];
        out.reserve(times.size());
        for (double t : times) {
            state = evolve_trajectory(state, law, rates, t - t_prev, rng);
            t_prev = t;
            out.push_back(raw_moments(state));
        }
    });

    auto summarise = [](const RawMoments &acc, double &metro_db, double &number_db, double &spin, double &n_mean) {
        const SpinMoments m = moments_from_raw(acc);
        n_mean = acc.n_atoms / acc.weight;
        const double len = m.mean_length();
        metro_db = units::to_db(n_mean * m.min_variance / (len * len));
        number_db = units::to_db(4.0 * m.min_variance / n_mean);
        spin = len / (0.5 * n_mean);
    };

    const int n_batches = std::min<int>(options.n_batches, options.n_trajectories);
    std::vector<LossScanPoint> out(times.size());
    for (size_t ti = 0; ti < times.size(); ++ti) {
        RawMoments all;
        std::vector<RawMoments> batches(n_batches);
        for (size_t i = 0; i < n_traj; ++i) {
            all += per_traj[i][ti];
            batches[i % n_batches] += per_traj[i][ti];
        }
        auto &p = out[ti];
        p.t = times[ti];
        summarise(all, p.squeezing_db, p.number_squeezing_db, p.mean_spin, p.n_mean);
        if (n_batches > 1) {
            std::vector<double> vals;
            for (const auto &b : batches) {
                double m, nn, s, n;
                summarise(b, m, nn, s, n);
                vals.push_back(m);
            }
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= vals.size();
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= (vals.size() - 1);
            p.stderr_db = std::sqrt(var / vals.size());
        }
    }
    return out;
}

}  // namespace squeezemag
