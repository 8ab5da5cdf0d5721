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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace orbit_tomo {
namespace {

constexpr double kPi = 3.14159265358979323846;

TEST(SeededRng, SplitmixReferenceValue) {
    // First output of the reference SplitMix64 generator started from state 0.
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(SeededRng, SameSeedSameStream) {
    SeededRng a(42, 3);
    SeededRng b(42, 3);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
    SeededRng c(42, 4);
    SeededRng d(42, 3);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        same += c.next_u64() == d.next_u64() ? 1 : 0;
    }
    EXPECT_EQ(same, 0);
}

TEST(SeededRng, UniformAndNormalMoments) {
    SeededRng rng(1, 0);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sn / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(sn2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Ginibre, ScalarAndDeterminism) {
    SeededRng a(7, 1);
    SeededRng b(7, 1);
    ComplexMatrix g1 = ginibre(1, a);
    EXPECT_EQ(g1.rows(), 1);
    EXPECT_EQ(g1.cols(), 1);
    ComplexMatrix x = ginibre(6, a);
    b.complex_normal();
    ComplexMatrix y = ginibre(6, b);
    EXPECT_TRUE(x == y);  // bit-identical
}

TEST(Ginibre, MeanModulusSquaredIsTwo) {
    SeededRng rng(2, 0);
    double sum = 0.0;
    const int samples = 2000;
    for (int s = 0; s < samples; ++s) {
        sum += ginibre(8, rng).cwiseAbs2().sum();
    }
    EXPECT_NEAR(sum / (samples * 64.0), 2.0, 0.1);
}

TEST(HaarUnitary, UnitarityResidual) {
    SeededRng rng(3, 0);
    for (int d = 1; d <= 12; ++d) {
        ComplexMatrix u = haar_unitary(d, rng);
        EXPECT_LT((u * u.adjoint() - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12) << "d=" << d;
    }
    ComplexMatrix scalar = haar_unitary(1, rng);
    EXPECT_NEAR(std::abs(scalar(0, 0)), 1.0, 1e-15);
}

double ks_uniform_statistic(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double worst = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double cdf = (x[i] + kPi) / (2.0 * kPi);
        worst = std::max({worst, std::abs(cdf - i / n), std::abs((i + 1) / n - cdf)});
    }
    return worst;
}

TEST(HaarUnitary, EigenphasesUniformKolmogorovSmirnov) {
    SeededRng rng(4, 0);
    const int batches = 40;
    int passed = 0;
    for (int b = 0; b < batches; ++b) {
        std::vector<double> phases;
        for (int s = 0; s < 500; ++s) {
            Eigen::ComplexEigenSolver<ComplexMatrix> es(haar_unitary(4, rng));
            phases.push_back(std::arg(es.eigenvalues()[s % 4]));
        }
        const double critical = 1.628 / std::sqrt(static_cast<double>(phases.size()));
        passed += ks_uniform_statistic(phases) < critical ? 1 : 0;
    }
    EXPECT_GE(passed, 38);  // at least 95% of batches
}

TEST(HaarUnitary, LeftInvarianceFirstMoments) {
    // Diagonals of V U and of U should have the same first moments:
    // E[U_ii] = 0 and E|U_ii|^2 = 1/d.
    SeededRng rng(5, 0);
    const int d = 3;
    const int samples = 5000;
    SeededRng vr(99, 0);
    ComplexMatrix v = haar_unitary(d, vr);
    Complex mean_u = 0.0, mean_vu = 0.0;
    double sq_u = 0.0, sq_vu = 0.0;
    for (int s = 0; s < samples; ++s) {
        ComplexMatrix u = haar_unitary(d, rng);
        ComplexMatrix vu = v * u;
        mean_u += u(0, 0);
        mean_vu += vu(0, 0);
        sq_u += std::norm(u(0, 0));
        sq_vu += std::norm(vu(0, 0));
    }
    const double sigma_mean = std::sqrt(1.0 / d / samples);
    EXPECT_LT(std::abs(mean_u / double(samples)), 3.0 * sigma_mean);
    EXPECT_LT(std::abs(mean_vu / double(samples)), 3.0 * sigma_mean);
    // Var|U_00|^2 = 2/(d(d+1)) - 1/d^2 for Haar columns.
    const double sigma_sq = std::sqrt((2.0 / (d * (d + 1.0)) - 1.0 / (d * d)) / samples);
    EXPECT_NEAR(sq_u / samples, 1.0 / d, 3.0 * sigma_sq);
    EXPECT_NEAR(sq_vu / samples, 1.0 / d, 3.0 * sigma_sq);
    EXPECT_NEAR(sq_u / samples, sq_vu / samples, 3.0 * std::sqrt(2.0) * sigma_sq);
}

TEST(FubiniStudy, PureAndUnbiased) {
    SeededRng rng(6, 0);
    double mean_z = 0.0;
    const int samples = 5000;
    for (int s = 0; s < samples; ++s) {
        DensityMatrix rho = random_pure_fubini_study(2, rng);
        ASSERT_NEAR(rho.purity(), 1.0, 1e-12);
        mean_z += (rho.matrix()(0, 0) - rho.matrix()(1, 1)).real();
    }
    EXPECT_NEAR(mean_z / samples, 0.0, 0.05);

    DensityMatrix r5 = random_pure_fubini_study(5, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r5.matrix());
    EXPECT_NEAR(es.eigenvalues()[4], 1.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()[3], 0.0, 1e-12);
}

TEST(HilbertSchmidt, MeanPurityAtDThree) {
    SeededRng rng(7, 0);
    double sum = 0.0;
    const int samples = 5000;
    for (int s = 0; s < samples; ++s) {
        DensityMatrix rho = random_mixed_hs(3, rng);
        sum += rho.purity();
    }
    EXPECT_NEAR(sum / samples, 2.0 * 3 / (9 + 1), 0.02);
}

TEST(HilbertSchmidt, MeanPurityOtherDimensions) {
    // Same closed form 2d/(d^2+1) at other dimensions.
    for (int d : {2, 4}) {
        SeededRng rng(70 + d, 0);
        double sum = 0.0;
        const int samples = 5000;
        for (int s = 0; s < samples; ++s) {
            sum += random_mixed_hs(d, rng).purity();
        }
        EXPECT_NEAR(sum / samples, 2.0 * d / (d * d + 1.0), 0.02) << "d=" << d;
    }
}

TEST(Bures, MorePureThanHilbertSchmidt) {
    SeededRng hs_rng(8, 0);
    SeededRng bures_rng(8, 1);
    double hs = 0.0, bures = 0.0;
    const int samples = 5000;
    for (int s = 0; s < samples; ++s) {
        hs += random_mixed_hs(2, hs_rng).purity();
        bures += random_mixed_bures(2, bures_rng).purity();
    }
    EXPECT_GT(bures / samples - hs / samples, 0.01);
}

TEST(MixedStates, ValidDensityMatricesAndReproducible) {
    for (int d : {2, 3, 6, 10}) {
        SeededRng a(9, d);
        SeededRng b(9, d);
        DensityMatrix x = random_mixed_bures(d, a);
        DensityMatrix y = random_mixed_bures(d, b);
        EXPECT_TRUE(x.matrix() == y.matrix());
        DensityMatrix p = random_mixed_hs(d, a);
        DensityMatrix q = random_mixed_hs(d, b);
        EXPECT_TRUE(p.matrix() == q.matrix());
        EXPECT_NEAR(p.matrix().trace().real(), 1.0, 1e-12);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p.matrix());
        EXPECT_GT(es.eigenvalues()[0], 0.0);  // full rank almost surely
    }
}

}  // namespace
}  // namespace orbit_tomo
