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

#ifndef ORBIT_TOMO_SPAN_ANALYSIS_H
#define ORBIT_TOMO_SPAN_ANALYSIS_H

#include <utility>
#include <vector>

#include <json.hpp>

#include "orbit_tomo/operator_core.h"
#include "orbit_tomo/orbit_record.h"

namespace orbit_tomo {

inline constexpr double kDefaultPhaseTolerance = 1e-9;
inline constexpr double kDefaultElementTolerance = 1e-10;
inline constexpr double kEigenvalueClusterTolerance = 1e-9;
inline constexpr double kEigenvalueGapWarning = 1e-10;

/// Spectral decomposition of a unitary, U0 = sum_j exp(-i phi_j) |j><j|.
/// Computed through the complex Schur form so the eigenvectors stay
/// orthonormal even inside degenerate eigenspaces. Sorted by ascending phi,
/// phases in (-pi, pi].
struct UnitaryEigen {
  ComplexVector eigenvalues;
  RealVector phases;
  ComplexMatrix vectors;
  /// Smallest |lambda_i - lambda_j| over i != j (infinity for d = 1).
  double min_gap = 0.0;
};

UnitaryEigen unitary_eigen(const ComplexMatrix &u0);

/// Eigenvalue multiplicities, clustering eigenvalues closer than `tolerance`
/// (single linkage). Clusters are listed in order of their first member.
std::vector<std::vector<int>> eigenvalue_clusters(const ComplexVector &eigenvalues,
                                                  double tolerance = kEigenvalueClusterTolerance);

int commutant_dimension(const ComplexMatrix &u0);
int missing_subspace_dimension(const ComplexMatrix &u0, const HermitianOperator &o0);
int span_dimension(const OperatorOrbit &orbit, const OperatorBasis &basis);

/// Two equal phase differences. A pair (-1, -1) stands for the constant
/// node (phase difference 0).
struct PhaseCollision {
  std::pair<int, int> first;
  std::pair<int, int> second;
};

struct SaturationReport {
  bool cond_diag_nonzero = false;
  int diag_witness = -1;  // first j with <j|O|j> != 0
  bool cond_offdiag_nonzero = false;
  std::pair<int, int> offdiag_failure{-1, -1};  // first (j, k) with <k|O|j> == 0
  bool cond_phase_differences_distinct = false;
  std::vector<PhaseCollision> collisions;
  RealVector eigenphases;
  /// False when two eigenvalues of U0 are closer than 1e-10, in which case the
  /// eigenbasis (and so conditions 1 and 2) is not well defined.
  bool reliable = true;
  bool saturated = false;
};

SaturationReport check_saturation(const ComplexMatrix &u0, const HermitianOperator &o0,
                                  double tol_phase = kDefaultPhaseTolerance,
                                  double tol_element = kDefaultElementTolerance);

void to_json(nlohmann::json &j, const SaturationReport &report);

/// Determinant of the Vandermonde matrix V_ik = x_i^k, returned as
/// (log|det|, arg det). log_abs is -infinity when two nodes coincide.
struct VandermondeDet {
  double log_abs = 0.0;
  double arg = 0.0;

  bool is_zero() const;
  Complex value() const;
};

VandermondeDet vandermonde_det(const ComplexVector &nodes);

/// {1} followed by exp(-i(phi_j - phi_k)) for all ordered pairs j != k,
/// row-major in (j, k).
ComplexVector orbit_vandermonde_nodes(const RealVector &phases);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_SPAN_ANALYSIS_H
