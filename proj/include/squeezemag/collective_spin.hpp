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

// Symmetric (Dicke) subspace of N two-level atoms.
//
// Basis index k = 0..N counts atoms in |b>; m = k - N/2 is the eigenvalue of
// Jz = (N_b - N_a)/2, so k = 0 is "all atoms in a". J+ raises k, with
// <k+1|J+|k> = sqrt((k+1)(N-k)). Global phases are never meaningful.

#pragma once

#include <array>
#include <complex>
#include <vector>

#include "squeezemag/random.hpp"

namespace squeezemag {

using cdouble = std::complex<double>;

class CollectiveState {
   public:
    /// |all a> of n atoms.
    explicit CollectiveState(int n_atoms);
    /// Takes ownership of amplitudes; requires size n_atoms + 1 and unit norm (1e-10).
    CollectiveState(int n_atoms, std::vector<cdouble> amplitudes);

    int n_atoms() const { return n_atoms_; }
    int dim() const { return n_atoms_ + 1; }
    const std::vector<cdouble> &amplitudes() const { return amp_; }
    cdouble operator[](int k) const { return amp_[k]; }

    /// Jz eigenvalue of basis index k.
    double m(int k) const { return k - 0.5 * n_atoms_; }
    double norm_squared() const;

    /// Basis state with k atoms in |b>.
    static CollectiveState dicke(int n_atoms, int k);

   private:
    int n_atoms_;
    std::vector<cdouble> amp_;
};

/// Rotation by `angle` about the equatorial axis (cos phase, sin phase, 0).
struct RotationSpec {
    double angle = 0.0;
    double phase = 0.0;
};

/// First and second moments of the collective spin.
struct SpinMoments {
    int n_atoms = 0;
    double mean_jx = 0.0;
    double mean_jy = 0.0;
    double mean_jz = 0.0;
    /// Symmetrised covariance matrix, rows/cols x, y, z.
    std::array<std::array<double, 3>, 3> cov{};
    /// Orthonormal frame of the plane perpendicular to the mean spin. A
    /// rotation by alpha about the mean spin followed by a Jz measurement
    /// reads out J . (cos(alpha) e1 - sin(alpha) e2).
    std::array<double, 3> e1{};
    std::array<double, 3> e2{};
    /// Angle in [0, pi) minimising var_along.
    double optimal_angle = 0.0;
    double min_variance = 0.0;
    double max_variance = 0.0;

    double var_jz() const { return cov[2][2]; }
    double mean_length() const;
    /// Variance of the spin component selected by a rotation of `alpha` about the mean spin.
    double var_along(double alpha) const;
    /// Variance of J . u for an arbitrary lab-frame unit vector.
    double var_component(const std::array<double, 3> &u) const;
};

CollectiveState make_css(int n, double polar, double azimuth);

/// exp(-i (chi Jz^2 + delta Jz) t).
CollectiveState evolve_oat(const CollectiveState &state, double chi, double delta, double t);

/// exp(-i angle Jz); a pure z rotation.
CollectiveState rotate_z(const CollectiveState &state, double angle);

/// exp(-i theta (Jx cos phi + Jy sin phi)) via Wigner small-d recursion.
CollectiveState rotate(const CollectiveState &state, const RotationSpec &spec);

/// Real Wigner small-d matrix d(theta) = exp(-i theta Jy), row-major
/// (N+1)x(N+1), element [k' * (N+1) + k] = <k'|d|k>. Exposed for tests.
std::vector<double> wigner_small_d(int n_atoms, double theta);

/// Evolve under H = rabi (Jx cos phase + Jy sin phase) + delta Jz + chi Jz^2
/// with an adaptive Lanczos propagator.
CollectiveState evolve_pulse(const CollectiveState &state, double rabi, double phase, double delta, double chi, double t);

SpinMoments moments(const CollectiveState &state);

/// Expectation values <J_i> and symmetrised <J_i J_j>/2 + <J_j J_i>/2. These
/// add linearly over a statistical mixture, which is how trajectory
/// ensembles are combined.
struct RawMoments {
    double weight = 0.0;  // number of states accumulated
    double n_atoms = 0.0;
    std::array<double, 3> mean{};
    std::array<std::array<double, 3>, 3> second{};

    RawMoments &operator+=(const RawMoments &o);
};

RawMoments raw_moments(const CollectiveState &state);
/// Moments of the (equal-weight) mixture described by accumulated raw moments.
SpinMoments moments_from_raw(const RawMoments &raw);

/// Projective Jz measurement. Returns m (half-integer when N is odd).
double sample_jz(const CollectiveState &state, Stream &rng);

/// |<a|b>| distance that ignores global phase: min over phi of ||a - e^{i phi} b||.
double phase_insensitive_distance(const CollectiveState &a, const CollectiveState &b);

}  // namespace squeezemag
