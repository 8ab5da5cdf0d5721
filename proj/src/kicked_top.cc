// Copyright 2026 The orbit_tomo Authors
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

#include "orbit_tomo/kicked_top.h"

#include <cmath>
#include <numbers>
#include <string>

#include "orbit_tomo/span_analysis.h"

namespace orbit_tomo {

namespace {

HermitianOperator twist_generator(const SpinMatrices &s, double j) {
    return HermitianOperator::hermitian_part(s.jz.matrix() * s.jz.matrix() / j);
}

}  // namespace

ComplexMatrix qkt_floquet(const KickedTopParams &p) {
    SpinMatrices s = spin_matrices(p.j);
    return expm_hermitian(twist_generator(s, p.j), p.phi) * expm_hermitian(s.jx, p.theta);
}

ComplexMatrix dkt_floquet(const DoubleKickedTopParams &p) {
    SpinMatrices s = spin_matrices(p.j);
    HermitianOperator twist = twist_generator(s, p.j);
    return expm_hermitian(twist, p.phi) * expm_hermitian(s.jx, p.theta_x) * expm_hermitian(twist, p.phi_prime) *
           expm_hermitian(s.jy, p.theta_y);
}

ComplexMatrix parity_operator(double j) {
    return expm_hermitian(spin_matrices(j).jx, std::numbers::pi);
}

ParityBlocks parity_blocks(double j) {
    const int d = spin_dimension(j);
    const bool integer_spin = d % 2 == 1;
    const Complex even_value = integer_spin ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    UnitaryEigen eig = unitary_eigen(parity_operator(j));
    auto clusters = eigenvalue_clusters(eig.eigenvalues);
    if (clusters.size() > 2) {
        throw NumericalError("parity_blocks: parity operator has more than two distinct eigenvalues");
    }
    ParityBlocks blocks;
    blocks.even.resize(d, 0);
    blocks.odd.resize(d, 0);
    for (const auto &cluster : clusters) {
        Complex value = eig.eigenvalues[cluster.front()];
        ComplexMatrix basis(d, static_cast<Eigen::Index>(cluster.size()));
        for (size_t i = 0; i < cluster.size(); ++i) {
            basis.col(static_cast<Eigen::Index>(i)) = eig.vectors.col(cluster[i]);
        }
        if (std::abs(value - even_value) < 1e-6) {
            blocks.even = std::move(basis);
        } else if (std::abs(value + even_value) < 1e-6) {
            blocks.odd = std::move(basis);
        } else {
            throw NumericalError("parity_blocks: unexpected parity eigenvalue");
        }
    }
    return blocks;
}

int symmetric_record_rank_prediction(int d, int p, int q) {
    if (p < 0 || q < 0 || p + q != d) {
        throw std::invalid_argument("symmetric_record_rank_prediction: block dimensions " + std::to_string(p) +
                                    " + " + std::to_string(q) + " do not add up to d = " + std::to_string(d));
    }
    return d * d - d + 1 - 2 * p * q;
}

ComplexVector spin_coherent_state(double j, double theta, double phi) {
    SpinMatrices s = spin_matrices(j);
    const int d = s.jz.dim();
    ComplexVector top = ComplexVector::Zero(d);
    top[0] = 1.0;  // |J, m = J>
    return expm_hermitian(s.jz, phi) * (expm_hermitian(s.jy, theta) * top);
}

DensityMatrix random_parity_cat(double j, SeededRng &rng) {
    double z = 2.0 * rng.uniform() - 1.0;
    double phi = 2.0 * std::numbers::pi * rng.uniform();
    ComplexVector coherent = spin_coherent_state(j, std::acos(z), phi);
    ParityBlocks blocks = parity_blocks(j);
    ComplexVector even = blocks.even * (blocks.even.adjoint() * coherent);
    ComplexVector odd = blocks.odd * (blocks.odd.adjoint() * coherent);
    return DensityMatrix::pure(even.norm() >= odd.norm() ? even : odd);
}

DensityMatrix random_extremal_jx_mixture(double j, SeededRng &rng) {
    SpinMatrices s = spin_matrices(j);
    HermitianEigen eig = eigh(s.jx);  // ascending: m_x = -J first, +J last
    const Eigen::Index d = eig.values.size();
    double w = rng.uniform();
    ComplexVector low = eig.vectors.col(0);
    ComplexVector high = eig.vectors.col(d - 1);
    ComplexMatrix rho = w * (high * high.adjoint()) + (1.0 - w) * (low * low.adjoint());
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

}  // namespace orbit_tomo
