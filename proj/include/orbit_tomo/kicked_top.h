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

#ifndef ORBIT_TOMO_KICKED_TOP_H
#define ORBIT_TOMO_KICKED_TOP_H

#include "orbit_tomo/operator_core.h"
#include "orbit_tomo/random_ensembles.h"

namespace orbit_tomo {

struct KickedTopParams {
  double j = 3.0;
  double phi = 7.0;      // nonlinear twist
  double theta = 0.228;  // linear kick about x
};

struct DoubleKickedTopParams {
  double j = 3.0;
  double phi = 6.0;
  double phi_prime = 6.0;
  double theta_x = 1.5707963267948966;
  double theta_y = 0.228;
};

/// exp(-i phi Jz^2 / J) exp(-i theta Jx).
ComplexMatrix qkt_floquet(const KickedTopParams &p);

/// exp(-i phi Jz^2/J) exp(-i theta_x Jx) exp(-i phi' Jz^2/J) exp(-i theta_y Jy).
ComplexMatrix dkt_floquet(const DoubleKickedTopParams &p);

/// Rotation by pi about x, exp(-i pi Jx).
ComplexMatrix parity_operator(double j);

/// Orthonormal bases of the two parity eigenspaces. For integer J the
/// eigenvalues are +1 (`even`) and -1 (`odd`); for half-integer J they are
/// +i and -i. Found by clustering the spectrum, not from a formula.
struct ParityBlocks {
  ComplexMatrix even;
  ComplexMatrix odd;

  int even_dim() const { return static_cast<int>(even.cols()); }
  int odd_dim() const { return static_cast<int>(odd.cols()); }
};

ParityBlocks parity_blocks(double j);

/// Rank of a parity-preserving record: d^2 - d + 1 - 2 p q.
int symmetric_record_rank_prediction(int d, int p, int q);

/// Spin coherent state pointing along (theta, phi) on the Bloch sphere.
ComplexVector spin_coherent_state(double j, double theta, double phi);

/// Parity projection of a uniformly oriented spin coherent state: a cat-like
/// superposition of the coherent states along n and along n rotated by pi
/// about x. The parity sector carrying the larger weight is kept.
DensityMatrix random_parity_cat(double j, SeededRng &rng);

/// w |J, m_x = +J><...| + (1 - w) |J, m_x = -J><...| with w uniform on [0, 1].
/// Both Jx eigenstates share parity (-1)^J.
DensityMatrix random_extremal_jx_mixture(double j, SeededRng &rng);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_KICKED_TOP_H
