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

#ifndef ORBIT_TOMO_RANDOM_ENSEMBLES_H
#define ORBIT_TOMO_RANDOM_ENSEMBLES_H

#include <cstdint>
#include <random>

#include "orbit_tomo/operator_core.h"

namespace orbit_tomo {

/// Deterministic random stream: std::mt19937_64 (whose output sequence is
/// fixed by the C++ standard) seeded through SplitMix64, with uniform and
/// normal variates derived here rather than by <random> distributions, whose
/// algorithms differ between standard libraries.
///
/// The optional stream tag separates independent uses of the same numeric
/// seed, e.g. the unitary and the state of one trial.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed, uint64_t stream = 0);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();
  /// Complex standard normal: real and imaginary parts each N(0, 1).
  Complex complex_normal();

 private:
  uint64_t seed_;
  uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; exposed for deriving per-trial seeds.
uint64_t splitmix64(uint64_t x);

ComplexMatrix ginibre(int d, SeededRng &rng);
/// Haar-distributed U(d) via QR of a Ginibre matrix with the phases of the
/// R diagonal folded back into Q.
ComplexMatrix haar_unitary(int d, SeededRng &rng);
ComplexVector random_state_vector(int d, SeededRng &rng);
DensityMatrix random_pure_fubini_study(int d, SeededRng &rng);
DensityMatrix random_mixed_hs(int d, SeededRng &rng);
DensityMatrix random_mixed_bures(int d, SeededRng &rng);

}  // namespace orbit_tomo

#endif  // ORBIT_TOMO_RANDOM_ENSEMBLES_H
