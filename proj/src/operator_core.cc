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

#include "orbit_tomo/operator_core.h"

#include <cmath>
#include <string>

namespace orbit_tomo {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void require_square(const ComplexMatrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
    }
}

}  // namespace

double max_abs(const ComplexMatrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix &m, double tolerance) {
    return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tolerance;
}

bool is_unitary(const ComplexMatrix &m, double tolerance) {
    if (m.rows() != m.cols()) {
        return false;
    }
    ComplexMatrix residual = m * m.adjoint() - ComplexMatrix::Identity(m.rows(), m.cols());
    return max_abs(residual) <= tolerance;
}

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "HermitianOperator");
    double err = max_abs(m_ - m_.adjoint());
    if (err > kHermitianTolerance) {
        throw std::invalid_argument("HermitianOperator: matrix is not Hermitian (max |A - A^dagger| = " +
                                    std::to_string(err) + ")");
    }
}

HermitianOperator HermitianOperator::hermitian_part(const ComplexMatrix &a) {
    require_square(a, "hermitian_part");
    ComplexMatrix h = 0.5 * (a + a.adjoint());
    return HermitianOperator(std::move(h), Unchecked{});
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "DensityMatrix");
    double herm = max_abs(m_ - m_.adjoint());
    if (herm > kHermitianTolerance) {
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian (max |A - A^dagger| = " +
                                    std::to_string(herm) + ")");
    }
    double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTolerance) {
        throw std::invalid_argument("DensityMatrix: trace is " + std::to_string(tr) + ", expected 1");
    }
    double smallest = eigh(m_).values[0];
    if (smallest < -kPsdTolerance) {
        throw std::invalid_argument("DensityMatrix: smallest eigenvalue " + std::to_string(smallest) +
                                    " is below -1e-9");
    }
}

DensityMatrix DensityMatrix::pure(const ComplexVector &psi) {
    double norm = psi.norm();
    if (!(norm > 0.0)) {
        throw std::invalid_argument("DensityMatrix::pure: zero vector");
    }
    ComplexVector v = psi / norm;
    ComplexMatrix rho = v * v.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
}

double DensityMatrix::purity() const {
    return (m_ * m_).trace().real();
}

CoordinateVector::CoordinateVector(int d, RealVector values) : d_(d), values_(std::move(values)) {
    if (d < 2) {
        throw std::invalid_argument("CoordinateVector: dimension must be at least 2");
    }
    if (values_.size() != static_cast<Eigen::Index>(d) * d - 1) {
        throw std::invalid_argument("CoordinateVector: expected " + std::to_string(d * d - 1) +
                                    " values, got " + std::to_string(values_.size()));
    }
}

int spin_dimension(double j) {
    double twice = 2.0 * j;
    double rounded = std::round(twice);
    if (!(j > 0.0) || std::abs(twice - rounded) > 1e-12) {
        throw std::invalid_argument("spin J must be a positive half-integer, got " + std::to_string(j));
    }
    return static_cast<int>(rounded) + 1;
}

SpinMatrices spin_matrices(double j) {
    int d = spin_dimension(j);
    j = 0.5 * (d - 1);
    ComplexMatrix jz = ComplexMatrix::Zero(d, d);
    ComplexMatrix jplus = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        double m = j - k;
        jz(k, k) = m;
        if (k > 0) {
            jplus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
        }
    }
    ComplexMatrix jminus = jplus.adjoint();
    ComplexMatrix jx = 0.5 * (jplus + jminus);
    ComplexMatrix jy = (jplus - jminus) / Complex(0.0, 2.0);
    return SpinMatrices{HermitianOperator(std::move(jx)), HermitianOperator(std::move(jy)),
                        HermitianOperator(std::move(jz))};
}

OperatorBasis::OperatorBasis(int d) : d_(d) {
    if (d < 2) {
        throw std::invalid_argument("hermitian_basis: d must be at least 2");
    }
    elements_.reserve(static_cast<size_t>(d) * d - 1);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            ComplexMatrix e = ComplexMatrix::Zero(d, d);
            e(j, k) = kInvSqrt2;
            e(k, j) = kInvSqrt2;
            elements_.emplace_back(std::move(e));
        }
    }
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            ComplexMatrix e = ComplexMatrix::Zero(d, d);
            e(j, k) = Complex(0.0, -kInvSqrt2);
            e(k, j) = Complex(0.0, kInvSqrt2);
            elements_.emplace_back(std::move(e));
        }
    }
    for (int l = 1; l < d; ++l) {
        double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        ComplexMatrix e = ComplexMatrix::Zero(d, d);
        for (int i = 0; i < l; ++i) {
            e(i, i) = norm;
        }
        e(l, l) = -l * norm;
        elements_.emplace_back(std::move(e));
    }
}

RealVector OperatorBasis::project(const ComplexMatrix &a) const {
    if (a.rows() != d_ || a.cols() != d_) {
        throw std::invalid_argument("OperatorBasis::project: dimension mismatch (basis d=" + std::to_string(d_) +
                                    ", operand " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
    }
    RealVector r(size());
    const int pairs = d_ * (d_ - 1) / 2;
    int p = 0;
    for (int j = 0; j < d_; ++j) {
        for (int k = j + 1; k < d_; ++k, ++p) {
            r[p] = (a(j, k).real() + a(k, j).real()) * kInvSqrt2;
            r[pairs + p] = (a(k, j).imag() - a(j, k).imag()) * kInvSqrt2;
        }
    }
    double partial = 0.0;
    for (int l = 1; l < d_; ++l) {
        partial += a(l - 1, l - 1).real();
        r[2 * pairs + l - 1] = (partial - l * a(l, l).real()) / std::sqrt(static_cast<double>(l) * (l + 1));
    }
    return r;
}

ComplexMatrix OperatorBasis::combine(const RealVector &r) const {
    if (r.size() != size()) {
        throw std::invalid_argument("OperatorBasis::combine: expected " + std::to_string(size()) +
                                    " coordinates, got " + std::to_string(r.size()));
    }
    ComplexMatrix m = ComplexMatrix::Zero(d_, d_);
    const int pairs = d_ * (d_ - 1) / 2;
    int p = 0;
    for (int j = 0; j < d_; ++j) {
        for (int k = j + 1; k < d_; ++k, ++p) {
            Complex v(r[p] * kInvSqrt2, -r[pairs + p] * kInvSqrt2);
            m(j, k) = v;
            m(k, j) = std::conj(v);
        }
    }
    // Diagonal element l contributes norm_l to entries i < l and -l*norm_l to
    // entry l; accumulate the suffix sums from the top down.
    double tail = 0.0;
    for (int l = d_ - 1; l >= 1; --l) {
        double c = r[2 * pairs + l - 1] / std::sqrt(static_cast<double>(l) * (l + 1));
        m(l, l) += tail - l * c;
        tail += c;
    }
    m(0, 0) += tail;
    return m;
}

OperatorBasis hermitian_basis(int d) {
    return OperatorBasis(d);
}

CoordinateVector to_coordinates(const HermitianOperator &op, const OperatorBasis &basis) {
    return CoordinateVector(basis.dim(), basis.project(op.matrix()));
}

CoordinateVector to_coordinates(const DensityMatrix &rho, const OperatorBasis &basis) {
    return CoordinateVector(basis.dim(), basis.project(rho.matrix()));
}

HermitianOperator from_coordinates(const CoordinateVector &r, const OperatorBasis &basis) {
    if (r.dim_d() != basis.dim()) {
        throw std::invalid_argument("from_coordinates: coordinate dimension " + std::to_string(r.dim_d()) +
                                    " does not match basis dimension " + std::to_string(basis.dim()));
    }
    ComplexMatrix m = basis.combine(r.values());
    m.diagonal().array() += 1.0 / basis.dim();
    return HermitianOperator::hermitian_part(m);
}

HermitianEigen eigh(const ComplexMatrix &h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigh: Hermitian eigendecomposition failed to converge");
    }
    return HermitianEigen{solver.eigenvalues(), solver.eigenvectors()};
}

HermitianEigen eigh(const HermitianOperator &h) {
    return eigh(h.matrix());
}

ComplexMatrix expm_hermitian(const HermitianOperator &h, double scale) {
    HermitianEigen eig = eigh(h);
    ComplexVector phases(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        phases[i] = std::polar(1.0, -scale * eig.values[i]);
    }
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

HermitianOperator sqrtm_psd(const HermitianOperator &a) {
    HermitianEigen eig = eigh(a);
    RealVector roots(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        double v = eig.values[i];
        if (v < -kPsdTolerance) {
            throw std::invalid_argument("sqrtm_psd: eigenvalue " + std::to_string(v) + " is below -1e-9");
        }
        roots[i] = std::sqrt(std::max(v, 0.0));
    }
    ComplexMatrix s = eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
    return HermitianOperator::hermitian_part(s);
}

}  // namespace orbit_tomo
