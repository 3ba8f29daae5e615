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

#include "squeezemag/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "squeezemag/error.hpp"

namespace squeezemag {

CollectiveState brute_force_oracle(const CollectiveState &initial, const HamiltonianParams &h, double t) {
    const int n = initial.n_atoms();
    if (n > 10) throw InvalidArgument("brute_force_oracle is limited to n <= 10");
    if (!(t >= 0)) throw InvalidArgument("brute_force_oracle: t must be >= 0");
    const int dim = n + 1;
    const double j = 0.5 * n;

    Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd jz = Eigen::MatrixXcd::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const double m = -j + r;
        jz(r, r) = m;
        if (r + 1 < dim) jp(r + 1, r) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    const Eigen::MatrixXcd jm = jp.adjoint();
    const Eigen::MatrixXcd jx = 0.5 * (jp + jm);
    const Eigen::MatrixXcd jy = (jp - jm) / std::complex<double>(0.0, 2.0);
    const Eigen::MatrixXcd ham =
        h.rabi * (std::cos(h.phase) * jx + std::sin(h.phase) * jy) + h.delta * jz + h.chi * jz * jz;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ham);
    const Eigen::VectorXd &lam = es.eigenvalues();
    const Eigen::MatrixXcd &v = es.eigenvectors();
    Eigen::VectorXcd psi(dim);
    for (int r = 0; r < dim; ++r) psi[r] = initial[r];
    Eigen::VectorXcd coeff = v.adjoint() * psi;
    for (int r = 0; r < dim; ++r) coeff[r] *= std::exp(std::complex<double>(0.0, -lam[r] * t));
    const Eigen::VectorXcd out = v * coeff;
    std::vector<cdouble> amp(out.data(), out.data() + dim);
    double nn = 0.0;
    for (const auto &x : amp) nn += std::norm(x);
    for (auto &x : amp) x /= std::sqrt(nn);
    return CollectiveState(n, std::move(amp));
}

TwistingMoments twisting_closed_form(int n_atoms, double chi, double t) {
    if (n_atoms < 2) throw InvalidArgument("twisting_closed_form needs n >= 2");
    const double j = 0.5 * n_atoms;
    const double mu = 2.0 * chi * t;
    const double big_a = 1.0 - std::pow(std::cos(mu), 2.0 * j - 2.0);
    const double big_b = 4.0 * std::sin(0.5 * mu) * std::pow(std::cos(0.5 * mu), 2.0 * j - 2.0);
    const double root = std::sqrt(big_a * big_a + big_b * big_b);
    TwistingMoments out;
    out.mean_length = j * std::pow(std::cos(chi * t), 2.0 * j - 1.0);
    out.min_variance = 0.5 * j * (1.0 + 0.5 * (j - 0.5) * (big_a - root));
    out.max_variance = 0.5 * j * (1.0 + 0.5 * (j - 0.5) * (big_a + root));
    return out;
}

}  // namespace squeezemag
