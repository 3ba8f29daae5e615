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

#include "squeezemag/collective_spin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <sstream>

#include "squeezemag/error.hpp"
#include "squeezemag/units.hpp"

namespace squeezemag {

namespace {

constexpr double kNormTolerance = 1e-10;

void require_finite(double x, const char *what) {
    if (!std::isfinite(x)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

// <k+1|J+|k> for k = 0..N-1.
std::vector<double> ladder_elements(int n) {
    std::vector<double> a(std::max(n, 0));
    for (int k = 0; k < n; ++k) {
        a[k] = std::sqrt(static_cast<double>(k + 1) * static_cast<double>(n - k));
    }
    return a;
}

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

// Column-by-column d(theta) for 0 < theta <= pi/2. Each column is an
// eigenvector of (sin theta Jx + cos theta Jz) and obeys a three-term
// recursion in the row index. The recursion is run inward from both edges
// (where it is stable, the solution grows) and stitched near the classical
// turning region m' ~ m cos(theta).
std::vector<double> small_d_reduced(int n, double theta) {
    const int dim = n + 1;
    std::vector<double> d(static_cast<size_t>(dim) * dim, 0.0);
    if (n == 0) {
        d[0] = 1.0;
        return d;
    }
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double j = 0.5 * n;
    const auto a = ladder_elements(n);
    std::vector<double> f(dim), g(dim);
    constexpr double kBig = 1e100;
    constexpr double kShrink = 1e-100;

    for (int col = 0; col < dim; ++col) {
        const double m = col - j;
        auto c = [&](int kp) { return 2.0 * (m - (kp - j) * ct) / st; };
        int kstar = static_cast<int>(std::lround(j + m * ct));
        kstar = std::clamp(kstar, 0, n);
        const int lo = std::max(kstar - 1, 0);
        const int hi = std::min(kstar + 1, n);

        f[0] = 1.0;
        for (int kp = 0; kp < hi; ++kp) {
            const double prev = kp > 0 ? a[kp - 1] * f[kp - 1] : 0.0;
            f[kp + 1] = (c(kp) * f[kp] - prev) / a[kp];
            if (std::abs(f[kp + 1]) > kBig) {
                for (int i = 0; i <= kp + 1; ++i) f[i] *= kShrink;
            }
        }
        g[n] = 1.0;
        for (int kp = n; kp > lo; --kp) {
            const double next = kp < n ? a[kp] * g[kp + 1] : 0.0;
            g[kp - 1] = (c(kp) * g[kp] - next) / a[kp - 1];
            if (std::abs(g[kp - 1]) > kBig) {
                for (int i = kp - 1; i <= n; ++i) g[i] *= kShrink;
            }
        }
        double fg = 0.0, gg = 0.0;
        for (int i = lo; i <= hi; ++i) {
            fg += f[i] * g[i];
            gg += g[i] * g[i];
        }
        if (!(gg > 0.0)) {
            throw NumericalFailure("wigner recursion: empty overlap at column " + std::to_string(col));
        }
        const double s = fg / gg;
        double peak = 0.0;
        for (int kp = 0; kp <= n; ++kp) {
            const double v = kp <= kstar ? f[kp] : s * g[kp];
            d[static_cast<size_t>(kp) * dim + col] = v;
            peak = std::max(peak, std::abs(v));
        }
        double norm2 = 0.0;
        for (int kp = 0; kp <= n; ++kp) {
            const double v = d[static_cast<size_t>(kp) * dim + col] / peak;
            norm2 += v * v;
        }
        const double inv = 1.0 / (peak * std::sqrt(norm2));
        for (int kp = 0; kp <= n; ++kp) d[static_cast<size_t>(kp) * dim + col] *= inv;
    }
    return d;
}

// (d(pi) v)_k' = (-1)^k' v_{N-k'}
std::vector<cdouble> flip_forward(const std::vector<cdouble> &v) {
    const int n = static_cast<int>(v.size()) - 1;
    std::vector<cdouble> out(v.size());
    for (int kp = 0; kp <= n; ++kp) out[kp] = (kp % 2 == 0 ? 1.0 : -1.0) * v[n - kp];
    return out;
}

// (d(-pi) v)_k' = (-1)^(N-k') v_{N-k'}
std::vector<cdouble> flip_backward(const std::vector<cdouble> &v) {
    const int n = static_cast<int>(v.size()) - 1;
    std::vector<cdouble> out(v.size());
    for (int kp = 0; kp <= n; ++kp) out[kp] = ((n - kp) % 2 == 0 ? 1.0 : -1.0) * v[n - kp];
    return out;
}

// Recently used d matrices of this thread; repeated pulses reuse them.
std::shared_ptr<const std::vector<double>> cached_small_d(int n, double theta) {
    struct Entry {
        int n;
        double theta;
        std::shared_ptr<const std::vector<double>> d;
    };
    thread_local std::deque<Entry> cache;
    for (const auto &e : cache)
        if (e.n == n && e.theta == theta) return e.d;
    auto d = std::make_shared<const std::vector<double>>(small_d_reduced(n, theta));
    cache.push_front({n, theta, d});
    if (cache.size() > 4) cache.pop_back();
    return d;
}

// Applies d(theta) with |theta| <= pi/2.
std::vector<cdouble> apply_small_d(const std::vector<cdouble> &v, double theta) {
    if (theta == 0.0) return v;
    const int dim = static_cast<int>(v.size());
    const auto holder = cached_small_d(dim - 1, std::abs(theta));
    const auto &d = *holder;
    std::vector<cdouble> out(dim, 0.0);
    if (theta > 0) {
        for (int r = 0; r < dim; ++r) {
            cdouble acc = 0.0;
            const double *row = &d[static_cast<size_t>(r) * dim];
            for (int c = 0; c < dim; ++c) acc += row[c] * v[c];
            out[r] = acc;
        }
    } else {
        for (int r = 0; r < dim; ++r) {
            const double *row = &d[static_cast<size_t>(r) * dim];
            const cdouble vr = v[r];
            for (int c = 0; c < dim; ++c) out[c] += row[c] * vr;
        }
    }
    return out;
}

double wrap_pi(double theta) {
    double t = std::remainder(theta, units::kTwoPi);
    if (t <= -units::kPi) t += units::kTwoPi;
    return t;
}

// ---------------------------------------------------------------------------
// Lanczos propagation of a real symmetric tridiagonal Hamiltonian.

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // off[k] couples k and k+1

    void apply(const cdouble *x, cdouble *y, int n) const {
        if (n == 1) {
            y[0] = diag[0] * x[0];
            return;
        }
        y[0] = diag[0] * x[0] + off[0] * x[1];
        for (int k = 1; k + 1 < n; ++k) y[k] = diag[k] * x[k] + off[k] * x[k + 1] + off[k - 1] * x[k - 1];
        y[n - 1] = diag[n - 1] * x[n - 1] + off[n - 2] * x[n - 2];
    }

    double norm_bound() const {
        double best = 0.0;
        const size_t n = diag.size();
        for (size_t k = 0; k < n; ++k) {
            double row = std::abs(diag[k]);
            if (k + 1 < n) row += std::abs(off[k]);
            if (k > 0) row += std::abs(off[k - 1]);
            best = std::max(best, row);
        }
        return best;
    }
};


void krylov_propagate(const Tridiagonal &h, std::vector<cdouble> &psi_in, double t) {
    constexpr int kMaxDim = 64;
    constexpr double kTolerance = 1e-10;
    const int n = static_cast<int>(psi_in.size());
    const double hnorm = h.norm_bound();
    if (t == 0.0) return;
    if (hnorm == 0.0) return;

    const int mmax = std::min(kMaxDim, n);
    Eigen::Map<Eigen::VectorXcd> psi(psi_in.data(), n);
    Eigen::MatrixXcd basis(n, mmax);
    Eigen::VectorXcd w(n);
    std::vector<double> alpha, beta;
    alpha.reserve(mmax);
    beta.reserve(mmax);
    double t_done = 0.0;
    double dt = std::min(t, 10.0 / hnorm);
    long steps = 0;

    while (t_done < t) {
        const double beta0 = psi.norm();
        basis.col(0) = psi / beta0;
        alpha.clear();
        beta.clear();
        double beta_last = 0.0;
        bool exact = false;
        for (int j = 0; j < mmax; ++j) {
            h.apply(basis.col(j).data(), w.data(), n);
            const double aj = basis.col(j).dot(w).real();
            w -= aj * basis.col(j);
            if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
            alpha.push_back(aj);
            const double bj = w.norm();
            if (bj < 1e-12 * hnorm || j + 1 == n) {
                exact = true;
                break;
            }
            if (j + 1 == mmax) {
                beta_last = bj;
                break;
            }
            beta.push_back(bj);
            basis.col(j + 1) = w / bj;
        }
        const int m = static_cast<int>(alpha.size());
        Eigen::VectorXd ev_diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd ev_sub(std::max(m - 1, 0));
        for (int i = 0; i + 1 < m; ++i) ev_sub[i] = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(ev_diag, ev_sub, Eigen::ComputeEigenvectors);
        const Eigen::VectorXd &lam = es.eigenvalues();
        const Eigen::MatrixXd &s = es.eigenvectors();

        auto coeffs = [&](double tau) {
            Eigen::VectorXcd e(m);
            for (int l = 0; l < m; ++l) e[l] = std::exp(cdouble(0.0, -lam[l] * tau)) * s(0, l);
            return Eigen::VectorXcd(s * e);
        };
        // Integrated Lanczos residual tau * beta_m |y_m(tau)|; it grows with tau.
        auto error = [&](double tau, const Eigen::VectorXcd &y) { return beta0 * tau * beta_last * std::abs(y[m - 1]); };
        auto allowed = [&](double tau) { return std::max(kTolerance * tau / t, 1e-15); };

        const double remaining = t - t_done;
        double tau = exact ? remaining : std::min(dt, remaining);
        Eigen::VectorXcd y = coeffs(tau);
        if (!exact) {
            // The basis does not depend on tau, so search for the longest acceptable step.
            if (error(tau, y) <= allowed(tau)) {
                while (tau < remaining) {
                    const double longer = std::min(remaining, 1.25 * tau);
                    Eigen::VectorXcd y2 = coeffs(longer);
                    if (error(longer, y2) > allowed(longer)) break;
                    tau = longer;
                    y = std::move(y2);
                }
            } else {
                while (error(tau, y) > allowed(tau)) {
                    tau *= 0.8;
                    if (tau < 1e-13 * t) {
                        std::ostringstream msg;
                        msg << "krylov propagation stalled: dim=" << n << " t=" << t << " done=" << t_done
                            << " err=" << error(tau, y) << " |H|<=" << hnorm;
                        throw NumericalFailure(msg.str());
                    }
                    y = coeffs(tau);
                }
            }
            dt = tau;
        }
        psi = basis.leftCols(m) * (beta0 * y);
        psi /= psi.norm();
        t_done += tau;
        if (++steps > 10'000'000) throw NumericalFailure("krylov propagation: step limit");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

CollectiveState::CollectiveState(int n_atoms) : n_atoms_(n_atoms) {
    if (n_atoms < 0) throw InvalidArgument("n_atoms must be >= 0");
    amp_.assign(n_atoms + 1, 0.0);
    amp_[0] = 1.0;
}

CollectiveState::CollectiveState(int n_atoms, std::vector<cdouble> amplitudes)
    : n_atoms_(n_atoms), amp_(std::move(amplitudes)) {
    if (n_atoms < 0) throw InvalidArgument("n_atoms must be >= 0");
    if (static_cast<int>(amp_.size()) != n_atoms + 1) {
        throw InvalidArgument("amplitude vector must have n_atoms + 1 entries");
    }
    const double nn = norm_squared();
    if (!(std::abs(nn - 1.0) <= kNormTolerance)) {
        std::ostringstream msg;
        msg << "state not normalised: |psi|^2 = " << nn;
        throw InvalidArgument(msg.str());
    }
}

double CollectiveState::norm_squared() const {
    double s = 0.0;
    for (const auto &x : amp_) s += std::norm(x);
    return s;
}

CollectiveState CollectiveState::dicke(int n_atoms, int k) {
    if (k < 0 || k > n_atoms) throw InvalidArgument("dicke index out of range");
    std::vector<cdouble> amp(n_atoms + 1, 0.0);
    amp[k] = 1.0;
    return CollectiveState(n_atoms, std::move(amp));
}

CollectiveState make_css(int n, double polar, double azimuth) {
    if (n < 1) throw InvalidArgument("make_css: n must be >= 1");
    require_finite(polar, "polar angle");
    require_finite(azimuth, "azimuth");
    const double c = std::cos(0.5 * polar);
    const double s = std::sin(0.5 * polar);
    std::vector<cdouble> amp(n + 1);
    // Log-space magnitudes; zero powers are handled explicitly so poles are exact.
    for (int k = 0; k <= n; ++k) {
        double mag;
        const int pc = n - k, ps = k;
        if ((pc > 0 && c == 0.0) || (ps > 0 && s == 0.0)) {
            mag = 0.0;
        } else {
            double lg = 0.5 * log_binomial(n, k);
            if (pc > 0) lg += pc * std::log(std::abs(c));
            if (ps > 0) lg += ps * std::log(std::abs(s));
            mag = std::exp(lg);
            if (pc % 2 == 1 && c < 0) mag = -mag;
            if (ps % 2 == 1 && s < 0) mag = -mag;
        }
        amp[k] = mag * std::exp(cdouble(0.0, -k * azimuth));
    }
    double nn = 0.0;
    for (const auto &x : amp) nn += std::norm(x);
    const double inv = 1.0 / std::sqrt(nn);
    for (auto &x : amp) x *= inv;
    return CollectiveState(n, std::move(amp));
}

CollectiveState evolve_oat(const CollectiveState &state, double chi, double delta, double t) {
    require_finite(chi, "chi");
    require_finite(delta, "delta");
    require_finite(t, "t");
    if (t < 0) throw InvalidArgument("evolve_oat: t must be >= 0");
    if (t == 0.0) return state;
    std::vector<cdouble> amp = state.amplitudes();
    for (int k = 0; k < state.dim(); ++k) {
        const double m = state.m(k);
        amp[k] *= std::exp(cdouble(0.0, -(chi * m * m + delta * m) * t));
    }
    return CollectiveState(state.n_atoms(), std::move(amp));
}

CollectiveState rotate_z(const CollectiveState &state, double angle) {
    require_finite(angle, "angle");
    if (angle == 0.0) return state;
    std::vector<cdouble> amp = state.amplitudes();
    for (int k = 0; k < state.dim(); ++k) amp[k] *= std::exp(cdouble(0.0, -angle * state.m(k)));
    return CollectiveState(state.n_atoms(), std::move(amp));
}

std::vector<double> wigner_small_d(int n_atoms, double theta) {
    if (n_atoms < 0) throw InvalidArgument("wigner_small_d: n_atoms must be >= 0");
    require_finite(theta, "theta");
    const int dim = n_atoms + 1;
    std::vector<double> out(static_cast<size_t>(dim) * dim, 0.0);
    // Build column by column by applying the rotation to basis vectors; this
    // reuses the range reduction of rotate().
    for (int col = 0; col < dim; ++col) {
        std::vector<cdouble> e(dim, 0.0);
        e[col] = 1.0;
        const double t = wrap_pi(theta);
        std::vector<cdouble> v;
        if (std::abs(t) <= units::kPi / 2) {
            v = apply_small_d(e, t);
        } else if (t > 0) {
            v = apply_small_d(flip_forward(e), t - units::kPi);
        } else {
            v = apply_small_d(flip_backward(e), t + units::kPi);
        }
        for (int r = 0; r < dim; ++r) out[static_cast<size_t>(r) * dim + col] = std::real(v[r]);
    }
    return out;
}

CollectiveState rotate(const CollectiveState &state, const RotationSpec &spec) {
    require_finite(spec.angle, "rotation angle");
    require_finite(spec.phase, "rotation phase");
    const double theta = wrap_pi(spec.angle);
    // Each full turn removed by the wrap contributes (-1)^N.
    const double turns = std::round((spec.angle - theta) / units::kTwoPi);
    const bool flip_sign = state.n_atoms() % 2 == 1 && std::fmod(std::abs(turns), 2.0) == 1.0;
    if (theta == 0.0) {
        if (!flip_sign) return state;
        std::vector<cdouble> v(state.amplitudes());
        for (auto &x : v) x = -x;
        return CollectiveState(state.n_atoms(), std::move(v));
    }
    // exp(-i theta (Jx cos phi + Jy sin phi)) = exp(-i beta Jz) exp(-i theta Jy) exp(i beta Jz)
    const double beta = spec.phase - units::kPi / 2;
    const int dim = state.dim();
    std::vector<cdouble> w(dim);
    for (int k = 0; k < dim; ++k) w[k] = std::exp(cdouble(0.0, beta * state.m(k))) * state[k];
    if (std::abs(theta) <= units::kPi / 2) {
        w = apply_small_d(w, theta);
    } else if (theta > 0) {
        w = apply_small_d(flip_forward(w), theta - units::kPi);
    } else {
        w = apply_small_d(flip_backward(w), theta + units::kPi);
    }
    for (int k = 0; k < dim; ++k) w[k] *= std::exp(cdouble(0.0, -beta * state.m(k)));
    double nn = 0.0;
    for (const auto &x : w) nn += std::norm(x);
    const double inv = (flip_sign ? -1.0 : 1.0) / std::sqrt(nn);
    for (auto &x : w) x *= inv;
    return CollectiveState(state.n_atoms(), std::move(w));
}

CollectiveState evolve_pulse(const CollectiveState &state, double rabi, double phase, double delta, double chi,
                             double t) {
    require_finite(rabi, "rabi");
    require_finite(phase, "phase");
    require_finite(delta, "delta");
    require_finite(chi, "chi");
    require_finite(t, "t");
    if (t < 0) throw InvalidArgument("evolve_pulse: t must be >= 0");
    if (rabi < 0) throw InvalidArgument("evolve_pulse: rabi must be >= 0");
    if (t == 0.0) return state;
    if (rabi == 0.0) return evolve_oat(state, chi, delta, t);

    // Gauge away the pulse phase: with v_k = e^{i phase k} c_k the coupling
    // becomes real, <k+1|H'|k> = (rabi/2) sqrt((k+1)(N-k)).
    const int n = state.n_atoms();
    const int dim = state.dim();
    Tridiagonal h;
    h.diag.resize(dim);
    h.off = ladder_elements(n);
    for (int k = 0; k < dim; ++k) {
        const double m = state.m(k);
        h.diag[k] = chi * m * m + delta * m;
    }
    for (auto &x : h.off) x *= 0.5 * rabi;

    std::vector<cdouble> v(dim);
    for (int k = 0; k < dim; ++k) v[k] = std::exp(cdouble(0.0, phase * k)) * state[k];
    krylov_propagate(h, v, t);
    for (int k = 0; k < dim; ++k) v[k] *= std::exp(cdouble(0.0, -phase * k));
    return CollectiveState(n, std::move(v));
}

// ---------------------------------------------------------------------------

double SpinMoments::mean_length() const { return std::sqrt(mean_jx * mean_jx + mean_jy * mean_jy + mean_jz * mean_jz); }

double SpinMoments::var_component(const std::array<double, 3> &u) const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += u[i] * cov[i][j] * u[j];
    return s;
}

double SpinMoments::var_along(double alpha) const {
    const double c = std::cos(alpha), s = std::sin(alpha);
    std::array<double, 3> u{};
    for (int i = 0; i < 3; ++i) u[i] = c * e1[i] - s * e2[i];
    return var_component(u);
}

namespace {

// Smallest angle in [0, pi) minimising f: 1e-3 rad grid, then golden section.
double minimise_periodic(const SpinMoments &mom) {
    constexpr double kGrid = 1e-3;
    const int n = static_cast<int>(std::ceil(units::kPi / kGrid));
    double best = mom.var_along(0.0);
    double worst = best;
    int best_i = 0;
    for (int i = 1; i < n; ++i) {
        const double v = mom.var_along(i * kGrid);
        worst = std::max(worst, v);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    const double scale = std::max(std::abs(worst), 1.0);
    if (worst - best <= 1e-12 * scale) return 0.0;
    double lo = (best_i - 1) * kGrid, hi = (best_i + 1) * kGrid;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = mom.var_along(x1), f2 = mom.var_along(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = mom.var_along(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = mom.var_along(x2);
        }
    }
    double a = 0.5 * (lo + hi);
    a = std::fmod(a, units::kPi);
    if (a < 0) a += units::kPi;
    if (a >= units::kPi) a -= units::kPi;
    return a;
}

}  // namespace

RawMoments &RawMoments::operator+=(const RawMoments &o) {
    weight += o.weight;
    n_atoms += o.n_atoms;
    for (int i = 0; i < 3; ++i) {
        mean[i] += o.mean[i];
        for (int j = 0; j < 3; ++j) second[i][j] += o.second[i][j];
    }
    return *this;
}

RawMoments raw_moments(const CollectiveState &state) {
    const int n = state.n_atoms();
    const auto &c = state.amplitudes();
    const auto a = ladder_elements(n);
    double jz = 0.0, jz2 = 0.0, pm = 0.0, mp = 0.0;
    cdouble jp = 0.0, jp2 = 0.0, p = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double pk = std::norm(c[k]);
        const double m = state.m(k);
        jz += pk * m;
        jz2 += pk * m * m;
        if (k > 0) pm += pk * a[k - 1] * a[k - 1];
        if (k < n) {
            mp += pk * a[k] * a[k];
            const cdouble t = std::conj(c[k + 1]) * a[k] * c[k];
            jp += t;
            p += t * (m + state.m(k + 1));
        }
        if (k + 1 < n) jp2 += std::conj(c[k + 2]) * a[k + 1] * a[k] * c[k];
    }
    RawMoments r;
    r.weight = 1.0;
    r.n_atoms = n;
    r.mean = {std::real(jp), std::imag(jp), jz};
    r.second[0][0] = (2.0 * std::real(jp2) + pm + mp) / 4.0;
    r.second[1][1] = (-2.0 * std::real(jp2) + pm + mp) / 4.0;
    r.second[2][2] = jz2;
    r.second[0][1] = r.second[1][0] = 0.5 * std::imag(jp2);
    r.second[0][2] = r.second[2][0] = 0.5 * std::real(p);
    r.second[1][2] = r.second[2][1] = 0.5 * std::imag(p);
    return r;
}

SpinMoments moments_from_raw(const RawMoments &raw) {
    if (!(raw.weight > 0)) throw InvalidArgument("moments_from_raw: empty accumulator");
    const double w = raw.weight;
    SpinMoments out;
    out.n_atoms = static_cast<int>(std::lround(raw.n_atoms / w));
    double mean[3];
    for (int i = 0; i < 3; ++i) mean[i] = raw.mean[i] / w;
    out.mean_jx = mean[0];
    out.mean_jy = mean[1];
    out.mean_jz = mean[2];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.cov[i][j] = raw.second[i][j] / w - mean[i] * mean[j];

    // Frame perpendicular to the mean spin.
    const double len = out.mean_length();
    std::array<double, 3> nvec{0.0, 0.0, 1.0};
    if (len > 1e-12 * (0.5 * raw.n_atoms / w + 1.0)) nvec = {mean[0] / len, mean[1] / len, mean[2] / len};
    std::array<double, 3> e1{-nvec[2] * nvec[0], -nvec[2] * nvec[1], 1.0 - nvec[2] * nvec[2]};
    const double l1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    if (l1 < 1e-9) {
        // Mean spin along z: use x, orthogonalised against n.
        e1 = {1.0, 0.0, 0.0};
        const double d = nvec[0];
        for (int i = 0; i < 3; ++i) e1[i] -= d * nvec[i];
        const double l = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
        for (auto &x : e1) x /= l;
    } else {
        for (auto &x : e1) x /= l1;
    }
    out.e1 = e1;
    out.e2 = {nvec[1] * e1[2] - nvec[2] * e1[1], nvec[2] * e1[0] - nvec[0] * e1[2], nvec[0] * e1[1] - nvec[1] * e1[0]};

    out.optimal_angle = minimise_periodic(out);
    out.min_variance = out.var_along(out.optimal_angle);
    out.max_variance = out.var_along(out.optimal_angle + units::kPi / 2);
    return out;
}

SpinMoments moments(const CollectiveState &state) { return moments_from_raw(raw_moments(state)); }

double sample_jz(const CollectiveState &state, Stream &rng) {
    const auto &c = state.amplitudes();
    std::vector<double> cdf(c.size());
    double acc = 0.0;
    for (size_t k = 0; k < c.size(); ++k) {
        acc += std::norm(c[k]);
        cdf[k] = acc;
    }
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    size_t k = static_cast<size_t>(it - cdf.begin());
    if (k >= c.size()) k = c.size() - 1;
    // Never land on a zero-probability level (possible only through u == cdf edge).
    while (std::norm(c[k]) == 0.0 && k > 0) --k;
    return state.m(static_cast<int>(k));
}

double phase_insensitive_distance(const CollectiveState &a, const CollectiveState &b) {
    if (a.dim() != b.dim()) throw InvalidArgument("phase_insensitive_distance: dimension mismatch");
    cdouble overlap = 0.0;
    for (int k = 0; k < a.dim(); ++k) overlap += std::conj(a[k]) * b[k];
    const double mag = std::abs(overlap);
    if (mag == 0.0) return std::sqrt(a.norm_squared() + b.norm_squared());
    const cdouble ph = std::conj(overlap) / mag;  // aligns b to a
    double s = 0.0;
    for (int k = 0; k < a.dim(); ++k) s += std::norm(a[k] - ph * b[k]);
    return std::sqrt(s);
}

}  // namespace squeezemag
