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

#include "orbit_tomo/random_ensembles.h"

#include <cmath>
#include <numbers>
#include <string>

namespace orbit_tomo {

namespace {

void require_dim(int d, int minimum, const char *what) {
    if (d < minimum) {
        throw std::invalid_argument(std::string(what) + ": dimension must be at least " + std::to_string(minimum));
    }
}

DensityMatrix normalized_gram(const ComplexMatrix &a) {
    ComplexMatrix rho = a * a.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho));
}

}  // namespace

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SeededRng::SeededRng(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(seed ^ splitmix64(stream))) {
}

double SeededRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Complex SeededRng::complex_normal() {
    double re = normal();
    double im = normal();
    return {re, im};
}

ComplexMatrix ginibre(int d, SeededRng &rng) {
    require_dim(d, 1, "ginibre");
    ComplexMatrix g(d, d);
    // Row-major fill so the stream layout does not depend on Eigen's storage order.
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            g(i, j) = rng.complex_normal();
        }
    }
    return g;
}

ComplexMatrix haar_unitary(int d, SeededRng &rng) {
    require_dim(d, 1, "haar_unitary");
    ComplexMatrix g = ginibre(d, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
    const ComplexMatrix &r = qr.matrixQR();
    for (int j = 0; j < d; ++j) {
        Complex rjj = r(j, j);
        double mag = std::abs(rjj);
        Complex phase = mag > 0.0 ? rjj / mag : Complex(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

ComplexVector random_state_vector(int d, SeededRng &rng) {
    require_dim(d, 1, "random_state_vector");
    ComplexVector v(d);
    for (int i = 0; i < d; ++i) {
        v[i] = rng.complex_normal();
    }
    return v / v.norm();
}

DensityMatrix random_pure_fubini_study(int d, SeededRng &rng) {
    require_dim(d, 2, "random_pure_fubini_study");
    return DensityMatrix::pure(random_state_vector(d, rng));
}

DensityMatrix random_mixed_hs(int d, SeededRng &rng) {
    require_dim(d, 2, "random_mixed_hs");
    return normalized_gram(ginibre(d, rng));
}

DensityMatrix random_mixed_bures(int d, SeededRng &rng) {
    require_dim(d, 2, "random_mixed_bures");
    ComplexMatrix g = ginibre(d, rng);
    ComplexMatrix u = haar_unitary(d, rng);
    ComplexMatrix a = (ComplexMatrix::Identity(d, d) + u) * g;
    return normalized_gram(a);
}

}  // namespace orbit_tomo
