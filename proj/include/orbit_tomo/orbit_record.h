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

#ifndef ORBIT_TOMO_ORBIT_RECORD_H
#define ORBIT_TOMO_ORBIT_RECORD_H

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "orbit_tomo/operator_core.h"
#include "orbit_tomo/random_ensembles.h"

namespace orbit_tomo {

inline constexpr double kRankEpsilon = 1e-12;

/// O_n = (U0^dagger)^n O U0^n for n = 0..n_max.
class OperatorOrbit {
 public:
  OperatorOrbit(ComplexMatrix u0, HermitianOperator o0, std::vector<HermitianOperator> operators)
      : u0_(std::move(u0)), o0_(std::move(o0)), operators_(std::move(operators)) {}

  const ComplexMatrix &u0() const { return u0_; }
  const HermitianOperator &o0() const { return o0_; }
  int length() const { return static_cast<int>(operators_.size()); }
  int dim() const { return o0_.dim(); }
  const HermitianOperator &operator[](int n) const { return operators_[n]; }
  const std::vector<HermitianOperator> &operators() const { return operators_; }

 private:
  ComplexMatrix u0_;
  HermitianOperator o0_;
  std::vector<HermitianOperator> operators_;
};

/// Rows are measurement steps, columns basis elements: entry (n, a) = Tr(O_n E_a).
struct DesignMatrix {
  int d = 0;
  RealMatrix entries;

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
  /// The first n rows.
  DesignMatrix prefix(int n) const;
};

struct MeasurementRecord {
  RealVector values;
  double ensemble_size = 1.0;
  double noise_sigma = 0.0;
  uint64_t seed = 0;

  int length() const { return static_cast<int>(values.size()); }
  MeasurementRecord prefix(int n) const;
};

/// Iterative conjugation O_{n+1} = U0^dagger O_n U0, re-Hermitized each step.
/// u0 must be unitary to within 1e-12.
OperatorOrbit build_orbit(const ComplexMatrix &u0, const HermitianOperator &o0, int n_max);

DesignMatrix design_matrix(const OperatorOrbit &orbit, const OperatorBasis &basis);

/// C = D^T D.
RealMatrix covariance(const DesignMatrix &design);

/// M_n = N Tr(O_n rho0) + sigma w_n with w_n i.i.d. standard normal.
MeasurementRecord simulate_record(const DensityMatrix &rho0, const OperatorOrbit &orbit, double ensemble_size,
                                  double sigma, SeededRng &rng);

/// Number of singular values at or above max(rows, cols) * 1e-12 * sigma_max.
int numerical_rank(const RealMatrix &m);
int numerical_rank(const RealVector &singular_values, Eigen::Index rows, Eigen::Index cols);

/// Row-major CSV with 17 significant digits, no header.
void write_csv(std::ostream &out, const RealMatrix &m);
void write_design_csv(std::ostream &out, const DesignMatrix &design);
/// Header "n,value" then one line per step.
void write_record_csv(std::ostream &out, const MeasurementRecord &record);
/// 17 significant digits, general notation.
std::string format_double(double v);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_ORBIT_RECORD_H
