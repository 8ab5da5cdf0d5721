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

#ifndef ORBIT_TOMO_OPERATOR_CORE_H
#define ORBIT_TOMO_OPERATOR_CORE_H

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace orbit_tomo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-9;

/// Raised when a computation cannot produce a trustworthy number (as opposed
/// to a caller handing in malformed input, which is std::invalid_argument).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double max_abs(const ComplexMatrix &m);
bool is_hermitian(const ComplexMatrix &m, double tolerance = kHermitianTolerance);
bool is_unitary(const ComplexMatrix &m, double tolerance);

/// A square complex matrix equal to its conjugate transpose to within 1e-12
/// (max-abs). Construction never symmetrizes: non-Hermitian input throws.
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix m);

  /// (A + A^dagger) / 2. For internal use where drift is expected and bounded.
  static HermitianOperator hermitian_part(const ComplexMatrix &a);

  const ComplexMatrix &matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double trace() const { return m_.trace().real(); }

 private:
  struct Unchecked {};
  HermitianOperator(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Hermitian, unit trace (1e-10), smallest eigenvalue >= -1e-9.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);
  explicit DensityMatrix(const HermitianOperator &h) : DensityMatrix(h.matrix()) {}

  static DensityMatrix pure(const ComplexVector &psi);

  const ComplexMatrix &matrix() const { return m_; }
  HermitianOperator as_operator() const { return HermitianOperator(m_); }
  int dim() const { return static_cast<int>(m_.rows()); }
  double purity() const;

 private:
  ComplexMatrix m_;
};

/// Coordinates of a unit-trace Hermitian matrix in the traceless basis:
/// rho = sum_a r_a E_a + I/d.
class CoordinateVector {
 public:
  CoordinateVector(int d, RealVector values);

  int dim_d() const { return d_; }
  const RealVector &values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

 private:
  int d_;
  RealVector values_;
};

struct SpinMatrices {
  HermitianOperator jx;
  HermitianOperator jy;
  HermitianOperator jz;
};

/// Spin-J angular momentum matrices in the |J,m> basis, m running from J down
/// to -J. J must be a positive half-integer.
SpinMatrices spin_matrices(double j);

/// Hilbert space dimension 2J+1, validating that 2J is a positive integer.
int spin_dimension(double j);

/// Generalized Gell-Mann basis of su(d), normalized so Tr(E_a E_b) = delta_ab.
///
/// Ordering is fixed: the symmetric elements (|j><k| + |k><j|)/sqrt2 for j<k in
/// row-major order, then the antisymmetric elements -i(|j><k| - |k><j|)/sqrt2
/// in the same order, then the d-1 diagonal elements
/// (sum_{i<l} |i><i| - l|l><l|) / sqrt(l(l+1)) for l = 1..d-1.
class OperatorBasis {
 public:
  explicit OperatorBasis(int d);

  int dim() const { return d_; }
  int size() const { return d_ * d_ - 1; }
  const HermitianOperator &operator[](int a) const { return elements_[a]; }
  const std::vector<HermitianOperator> &elements() const { return elements_; }

  /// r_a = Re Tr(A E_a) for any square A. Uses the sparsity of the basis, so it
  /// costs O(d^2). The identity component of A is dropped.
  RealVector project(const ComplexMatrix &a) const;
  /// sum_a r_a E_a (traceless, no identity part).
  ComplexMatrix combine(const RealVector &r) const;

 private:
  int d_;
  std::vector<HermitianOperator> elements_;
};

OperatorBasis hermitian_basis(int d);

CoordinateVector to_coordinates(const HermitianOperator &op, const OperatorBasis &basis);
CoordinateVector to_coordinates(const DensityMatrix &rho, const OperatorBasis &basis);
/// sum_a r_a E_a + I/d. Hermitian and unit trace, not necessarily PSD.
HermitianOperator from_coordinates(const CoordinateVector &r, const OperatorBasis &basis);

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns, orthonormal
};

HermitianEigen eigh(const ComplexMatrix &h);
HermitianEigen eigh(const HermitianOperator &h);

/// exp(-i * scale * H).
ComplexMatrix expm_hermitian(const HermitianOperator &h, double scale);

/// PSD square root. Eigenvalues in [-1e-9, 0) are clipped to zero; anything
/// more negative throws std::invalid_argument.
HermitianOperator sqrtm_psd(const HermitianOperator &a);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_OPERATOR_CORE_H
