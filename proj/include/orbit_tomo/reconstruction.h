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

#ifndef ORBIT_TOMO_RECONSTRUCTION_H
#define ORBIT_TOMO_RECONSTRUCTION_H

#include <optional>
#include <stdexcept>
#include <string_view>

#include "orbit_tomo/operator_core.h"
#include "orbit_tomo/orbit_record.h"

namespace orbit_tomo {

struct MlEstimate {
  CoordinateVector r_ml;
  int covariance_rank = 0;
  bool used_pseudo_inverse = false;
};

/// Least-squares inverse of a fixed design matrix. The SVD is computed once,
/// so many records measured with the same design can be inverted cheaply.
/// Singular values under the numerical_rank threshold are dropped, which
/// makes the estimate the Moore-Penrose solution: its component in the null
/// space of C = D^T D is zero.
class LinearInverter {
 public:
  explicit LinearInverter(const DesignMatrix &design);

  int rank() const { return rank_; }
  int dim() const { return d_; }
  const RealMatrix &pseudo_inverse() const { return pinv_; }
  /// Orthogonal projector onto range(C).
  RealMatrix range_projector() const;

  MlEstimate estimate(const MeasurementRecord &record, double ensemble_size) const;

 private:
  int d_;
  int rows_;
  int rank_ = 0;
  RealMatrix pinv_;
  RealMatrix range_basis_;
};

/// r_ml = (1/N) pinv(D) M.
MlEstimate ml_estimate(const DesignMatrix &design, const MeasurementRecord &record, double ensemble_size);

/// (r - r_ml)^T C (r - r_ml).
double seminorm_cost(const RealVector &r, const RealVector &r_ml, const RealMatrix &c);

enum class FitMethod {
  /// Primal log-barrier path following with Newton centering steps.
  barrier,
  /// Projected gradient with step 1/lambda_max(C), Nesterov momentum and
  /// function-value restarts.
  projected_gradient,
};

std::string_view to_string(FitMethod method);
FitMethod parse_fit_method(std::string_view name);

struct FitOptions {
  FitMethod method = FitMethod::barrier;

  // barrier: stop once the duality-gap bound d/t falls below
  // gap_tolerance * lambda_max(C).
  double gap_tolerance = 1e-12;
  double barrier_growth = 10.0;
  int max_newton_steps = 600;

  // projected_gradient: stop when the relative cost change between
  // iterations drops below relative_tolerance.
  double relative_tolerance = 1e-10;
  int max_iterations = 50000;
};

struct FitResult {
  DensityMatrix rho_bar;
  CoordinateVector r_bar;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// The eigenvalue-clip baseline was cheaper than the solver output and was
  /// returned instead.
  bool used_baseline = false;
};

/// Minimizes the covariance seminorm over density matrices. When rho_ml is
/// already PSD (to -1e-9) it is returned unchanged with cost 0. The result is
/// never more expensive than the clip-and-renormalize baseline of rho_ml.
FitResult positivity_fit(const MlEstimate &ml, const RealMatrix &c, const OperatorBasis &basis,
                         const FitOptions &options = {});

/// Eigenvalues of rho_ml clipped at zero, then renormalized to unit trace.
DensityMatrix clip_to_density(const HermitianOperator &h);

/// Euclidean (Frobenius) projection of a Hermitian matrix onto the set of
/// density matrices: eigenvalues are projected onto the probability simplex.
ComplexMatrix project_to_density(const ComplexMatrix &h);
RealVector project_to_simplex(const RealVector &v);

/// Uhlmann fidelity [Tr sqrt(sqrt(a) b sqrt(a))]^2, evaluated as the squared
/// trace norm of sqrt(a) sqrt(b), which is symmetric in a and b.
double fidelity(const DensityMatrix &a, const DensityMatrix &b);

/// Raised when every off-diagonal element vanishes: the state is then an
/// eigenstate of U0 and its diagonal cannot be recovered.
class EigenstateAmbiguity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Extra linear information on the diagonal, sum_j weights_j rho_jj = value.
/// Only consulted when the off-diagonals leave a two-fold ambiguity (state
/// supported on exactly two eigenvectors).
struct DiagonalHint {
  RealVector weights;
  double value = 0.0;
};

/// Fills in the diagonal of a pure state from its off-diagonal elements in
/// the U0 eigenbasis, using rho_ii = |rho_ij| |rho_ik| / |rho_jk|. Only the
/// strict upper triangle of `elements` is read. Without a hint, a two-level
/// ambiguity is resolved by taking the larger population first.
DensityMatrix pure_state_diagonal_recovery(const ComplexMatrix &elements,
                                           const std::optional<DiagonalHint> &hint = std::nullopt);

/// Purity prior for a finished fit. The record fixes the off-diagonal
/// elements in the eigenbasis of U0, so a rank-one state rebuilt from those
/// elements of the unconstrained estimate is a candidate whenever the true
/// state is known to be pure. The
/// candidate replaces `fit` only when its seminorm cost ties or beats the fit
/// (within 1e-9 of the largest eigenvalue of C). `eigenvectors` holds the
/// eigenvectors of U0 as columns. Returns `fit` unchanged when no candidate can
/// be formed.
FitResult apply_purity_prior(const FitResult &fit, const MlEstimate &ml, const RealMatrix &c,
                             const OperatorBasis &basis, const ComplexMatrix &eigenvectors,
                             const HermitianOperator &observable);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_RECONSTRUCTION_H
