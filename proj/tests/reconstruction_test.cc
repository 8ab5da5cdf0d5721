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

#include "orbit_tomo/reconstruction.h"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "orbit_tomo/random_ensembles.h"
#include "orbit_tomo/span_analysis.h"

namespace orbit_tomo {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct Scenario {
  OperatorBasis basis;
  OperatorOrbit orbit;
  DesignMatrix design;
  RealMatrix c;
};

Scenario make_setup(int d, int length, uint64_t seed) {
    SeededRng rng(seed, 1);
    OperatorBasis basis(d);
    OperatorOrbit orbit = build_orbit(haar_unitary(d, rng), spin_matrices(0.5 * (d - 1)).jz, length - 1);
    DesignMatrix design = design_matrix(orbit, basis);
    RealMatrix c = covariance(design);
    return Scenario{std::move(basis), std::move(orbit), std::move(design), std::move(c)};
}

MeasurementRecord exact_record(const Scenario &s, const DensityMatrix &rho) {
    SeededRng unused(0, 0);
    return simulate_record(rho, s.orbit, 1.0, 0.0, unused);
}

// Orthogonal projector onto range(C) from an independent SVD of C itself.
// Projector onto the row space of the design. Working from the design rather
// than C keeps the conditioning at sqrt(cond C).
RealMatrix svd_projector(const DesignMatrix &design) {
    Eigen::JacobiSVD<RealMatrix> svd(design.entries, Eigen::ComputeFullV);
    const RealVector s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        rank += s[i] > 1e-10 * s[0] ? 1 : 0;
    }
    RealMatrix v = svd.matrixV().leftCols(rank);
    return v * v.transpose();
}

TEST(MlEstimate, ExactForCompleteQubitRecord) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        Scenario s = make_setup(2, 3, seed);
        SeededRng rng(seed, 2);
        DensityMatrix rho = random_mixed_hs(2, rng);
        MlEstimate ml = ml_estimate(s.design, exact_record(s, rho), 1.0);
        EXPECT_EQ(ml.covariance_rank, 3);
        EXPECT_FALSE(ml.used_pseudo_inverse);
        EXPECT_LT((ml.r_ml.values() - to_coordinates(rho, s.basis).values()).norm(), 1e-9);
    }
}

TEST(MlEstimate, ExactForFullRankDesign) {
    // Synthetic full-rank design at d=3 (a single orbit cannot reach d^2 - 1).
    SeededRng rng(3, 0);
    OperatorBasis basis(3);
    DesignMatrix design{3, RealMatrix::Zero(12, 8)};
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 8; ++j) {
            design.entries(i, j) = rng.normal();
        }
    }
    DensityMatrix rho = random_mixed_bures(3, rng);
    RealVector r = to_coordinates(rho, basis).values();
    MeasurementRecord rec;
    rec.values = 2.5 * design.entries * r;
    MlEstimate ml = ml_estimate(design, rec, 2.5);
    EXPECT_EQ(ml.covariance_rank, 8);
    EXPECT_LT((ml.r_ml.values() - r).norm(), 1e-9);
}

TEST(MlEstimate, IncompleteRecordGivesRangeProjection) {
    for (int d : {3, 4, 5}) {
        Scenario s = make_setup(d, d * d - d + 1, 10 + d);
        SeededRng rng(d, 2);
        DensityMatrix rho = random_mixed_hs(d, rng);
        MlEstimate ml = ml_estimate(s.design, exact_record(s, rho), 1.0);
        EXPECT_TRUE(ml.used_pseudo_inverse);
        EXPECT_EQ(ml.covariance_rank, d * d - d + 1);
        RealVector expected = svd_projector(s.design) * to_coordinates(rho, s.basis).values();
        EXPECT_LT((ml.r_ml.values() - expected).norm(), 1e-9) << "d=" << d;
    }
}

TEST(MlEstimate, PseudoInverseProjectorEquivalence) {
    for (int d : {3, 4, 6}) {
        for (int length : {d, d * d - d + 1, 3 * d * d}) {
            Scenario s = make_setup(d, length, 100 + length);
            LinearInverter inv(s.design);
            RealMatrix p = inv.pseudo_inverse() * s.design.entries;
            RealMatrix oracle = svd_projector(s.design);
            EXPECT_LT((p - oracle).cwiseAbs().maxCoeff(), 1e-9) << "d=" << d << " L=" << length;
            EXPECT_LT((inv.range_projector() - oracle).cwiseAbs().maxCoeff(), 1e-9);
            EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(MlEstimate, LinearInRecord) {
    Scenario s = make_setup(4, 20, 7);
    SeededRng rng(7, 3);
    LinearInverter inv(s.design);
    for (int trial = 0; trial < 10; ++trial) {
        MeasurementRecord m1, m2, sum;
        m1.values = RealVector::NullaryExpr(20, [&](Eigen::Index) { return rng.normal(); });
        m2.values = RealVector::NullaryExpr(20, [&](Eigen::Index) { return rng.normal(); });
        sum.values = m1.values + m2.values;
        RealVector lhs = inv.estimate(sum, 1.0).r_ml.values();
        RealVector rhs = inv.estimate(m1, 1.0).r_ml.values() + inv.estimate(m2, 1.0).r_ml.values();
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(MlEstimate, RejectsMismatchedRecord) {
    Scenario s = make_setup(3, 7, 1);
    MeasurementRecord rec;
    rec.values = RealVector::Zero(6);
    EXPECT_THROW(ml_estimate(s.design, rec, 1.0), std::invalid_argument);
    rec.values = RealVector::Zero(7);
    EXPECT_THROW(ml_estimate(s.design, rec, 0.0), std::invalid_argument);
}

TEST(SeminormCost, NullSpaceDirectionsAreFree) {
    for (int d : {3, 5}) {
        Scenario s = make_setup(d, d * d - d + 1, 20 + d);
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(s.c);
        SeededRng rng(d, 4);
        RealVector r_ml = RealVector::NullaryExpr(s.c.rows(), [&](Eigen::Index) { return rng.normal(); });
        RealVector r = RealVector::NullaryExpr(s.c.rows(), [&](Eigen::Index) { return rng.normal(); });
        const double base = seminorm_cost(r, r_ml, s.c);
        const double cut = 1e-10 * es.eigenvalues().maxCoeff();
        int checked = 0;
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            if (std::abs(es.eigenvalues()[k]) > cut) {
                continue;
            }
            RealVector moved = r + 0.7 * es.eigenvectors().col(k);
            EXPECT_LT(std::abs(seminorm_cost(moved, r_ml, s.c) - base), 1e-12 * std::max(1.0, base));
            ++checked;
        }
        EXPECT_EQ(checked, d - 2);
    }
}

TEST(PositivityFit, AlreadyPhysicalIsReturnedUnchanged) {
    Scenario s = make_setup(3, 7, 30);
    SeededRng rng(30, 2);
    DensityMatrix rho(ComplexMatrix::Identity(3, 3) / 3.0);
    MlEstimate ml = ml_estimate(s.design, exact_record(s, rho), 1.0);
    FitResult fit = positivity_fit(ml, s.c, s.basis);
    EXPECT_EQ(fit.cost, 0.0);
    EXPECT_TRUE(fit.converged);
    EXPECT_LT(max_abs(fit.rho_bar.matrix() - rho.matrix()), 1e-12);
}

TEST(PositivityFit, QubitOutsideBlochBallIdentityMetric) {
    OperatorBasis basis(2);
    RealMatrix c = RealMatrix::Identity(3, 3);
    SeededRng rng(31, 0);
    for (int trial = 0; trial < 10; ++trial) {
        RealVector dir(3);
        dir << rng.normal(), rng.normal(), rng.normal();
        dir.normalize();
        // Bloch length 1.5 is coordinate length 1.5 / sqrt(2).
        RealVector r_ml = dir * (1.5 / std::sqrt(2.0));
        MlEstimate ml{CoordinateVector(2, r_ml), 3, false};
        FitResult fit = positivity_fit(ml, c, basis);
        EXPECT_TRUE(fit.converged);
        EXPECT_NEAR(fit.cost, 0.125, 1e-8);
        EXPECT_LT((fit.r_bar.values() - dir / std::sqrt(2.0)).norm(), 1e-6);
    }
}

TEST(PositivityFit, MatchesSphereScanWithGeneralMetric) {
    // When r_ml lies outside the Bloch ball and C is positive definite the
    // minimizer lies on the sphere; scan it finely and refine locally.
    OperatorBasis basis(2);
    SeededRng rng(32, 0);
    for (int trial = 0; trial < 5; ++trial) {
        RealMatrix a = RealMatrix::NullaryExpr(3, 3, [&](Eigen::Index, Eigen::Index) { return rng.normal(); });
        RealMatrix c = a * a.transpose() + 0.2 * RealMatrix::Identity(3, 3);
        RealVector r_ml(3);
        r_ml << rng.normal(), rng.normal(), rng.normal();
        r_ml *= 1.3 / r_ml.norm();
        MlEstimate ml{CoordinateVector(2, r_ml), 3, false};
        FitResult fit = positivity_fit(ml, c, basis);
        double best = std::numeric_limits<double>::infinity();
        const int steps = 400;
        for (int i = 0; i <= steps; ++i) {
            const double theta = kPi * i / steps;
            for (int j = 0; j < 2 * steps; ++j) {
                const double phi = kPi * j / steps;
                RealVector p(3);
                p << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
                best = std::min(best, seminorm_cost(p / std::sqrt(2.0), r_ml, c));
            }
        }
        EXPECT_LE(fit.cost, best + 1e-9);
        EXPECT_GE(fit.cost, best - 1e-3 * best - 1e-9);
    }
}

TEST(PositivityFit, NeverWorseThanClipBaseline) {
    for (int d : {2, 3, 4, 5}) {
        for (int trial = 0; trial < 8; ++trial) {
            Scenario s = make_setup(d, d * d - d + 1 + trial, 40 + 10 * d + trial);
            SeededRng rng(d, 5 + trial);
            DensityMatrix rho = trial % 2 == 0 ? random_pure_fubini_study(d, rng) : random_mixed_bures(d, rng);
            SeededRng noise(d, 50 + trial);
            MeasurementRecord rec = simulate_record(rho, s.orbit, 1.0, 0.05, noise);
            MlEstimate ml = ml_estimate(s.design, rec, 1.0);
            FitResult fit = positivity_fit(ml, s.c, s.basis);
            HermitianOperator h = from_coordinates(ml.r_ml, s.basis);
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
            if (es.eigenvalues()[0] < -1e-9) {
                DensityMatrix baseline = clip_to_density(h);
                double baseline_cost = seminorm_cost(to_coordinates(baseline, s.basis).values(), ml.r_ml.values(), s.c);
                EXPECT_LE(fit.cost, baseline_cost + 1e-12);
            }
            EXPECT_NEAR(fit.rho_bar.matrix().trace().real(), 1.0, 1e-10);
            EXPECT_NEAR(seminorm_cost(fit.r_bar.values(), ml.r_ml.values(), s.c), fit.cost, 1e-12 + 1e-9 * fit.cost);
            EXPECT_TRUE(std::isfinite(fit.cost));
        }
    }
}

TEST(PositivityFit, SolversAgreeOnCost) {
    for (int d : {2, 3}) {
        for (int trial = 0; trial < 4; ++trial) {
            Scenario s = make_setup(d, 2 * d * d, 60 + trial + 10 * d);
            SeededRng rng(d, 60 + trial);
            DensityMatrix rho = random_pure_fubini_study(d, rng);
            SeededRng noise(d, 70 + trial);
            MlEstimate ml = ml_estimate(s.design, simulate_record(rho, s.orbit, 1.0, 0.1, noise), 1.0);
            FitOptions pgd;
            pgd.method = FitMethod::projected_gradient;
            FitResult a = positivity_fit(ml, s.c, s.basis);
            FitResult b = positivity_fit(ml, s.c, s.basis, pgd);
            EXPECT_NEAR(a.cost, b.cost, 1e-6 * std::max(1.0, b.cost));
            EXPECT_LE(a.cost, b.cost + 1e-9);
        }
    }
}

TEST(PositivityFit, IterationCapReportsNonConvergence) {
    Scenario s = make_setup(3, 7, 80);
    SeededRng rng(80, 2);
    DensityMatrix rho = random_pure_fubini_study(3, rng);
    MlEstimate ml = ml_estimate(s.design, exact_record(s, rho), 1.0);
    FitOptions capped;
    capped.max_newton_steps = 2;
    FitResult fit = positivity_fit(ml, s.c, s.basis, capped);
    EXPECT_FALSE(fit.converged);
    EXPECT_EQ(fit.iterations, 2);

    FitOptions pgd;
    pgd.method = FitMethod::projected_gradient;
    pgd.max_iterations = 3;
    pgd.relative_tolerance = 0.0;
    FitResult slow = positivity_fit(ml, s.c, s.basis, pgd);
    EXPECT_FALSE(slow.converged);
}

TEST(PositivityFit, PureStateAtDFive) {
    int high = 0;
    const int states = 10;
    for (int trial = 0; trial < states; ++trial) {
        Scenario s = make_setup(5, 21, 90 + trial);
        SeededRng rng(90 + trial, 2);
        DensityMatrix rho = random_pure_fubini_study(5, rng);
        FitResult fit = positivity_fit(ml_estimate(s.design, exact_record(s, rho), 1.0), s.c, s.basis);
        high += fidelity(fit.rho_bar, rho) >= 0.999 ? 1 : 0;
    }
    EXPECT_EQ(high, states);
}

TEST(FitMethodNames, RoundTrip) {
    EXPECT_EQ(parse_fit_method(to_string(FitMethod::barrier)), FitMethod::barrier);
    EXPECT_EQ(parse_fit_method(to_string(FitMethod::projected_gradient)), FitMethod::projected_gradient);
    EXPECT_EQ(parse_fit_method("pgd"), FitMethod::projected_gradient);
    EXPECT_THROW(parse_fit_method("simplex"), std::invalid_argument);
}

TEST(Simplex, ProjectionProperties) {
    RealVector v(3);
    v << 0.5, 0.5, 0.5;
    RealVector p = project_to_simplex(v);
    EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-15);
    v << 2.0, 0.0, -1.0;
    p = project_to_simplex(v);
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    EXPECT_NEAR(p[1], 0.0, 1e-15);

    // Brute-force comparison on a grid of the 2-simplex.
    SeededRng rng(4, 0);
    for (int trial = 0; trial < 20; ++trial) {
        v << rng.normal(), rng.normal(), rng.normal();
        p = project_to_simplex(v);
        EXPECT_NEAR(p.sum(), 1.0, 1e-14);
        EXPECT_GE(p.minCoeff(), 0.0);
        double best = std::numeric_limits<double>::infinity();
        const int n = 300;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; i + j <= n; ++j) {
                RealVector q(3);
                q << double(i) / n, double(j) / n, double(n - i - j) / n;
                best = std::min(best, (q - v).squaredNorm());
            }
        }
        EXPECT_LE((p - v).squaredNorm(), best + 1e-12);
    }
}

TEST(Fidelity, Examples) {
    ComplexVector zero = ComplexVector::Zero(2);
    zero[0] = 1.0;
    ComplexVector one = ComplexVector::Zero(2);
    one[1] = 1.0;
    DensityMatrix mixed(ComplexMatrix::Identity(2, 2) / 2.0);
    EXPECT_NEAR(fidelity(mixed, DensityMatrix::pure(zero)), 0.5, 1e-12);
    EXPECT_NEAR(fidelity(DensityMatrix::pure(zero), DensityMatrix::pure(one)), 0.0, 1e-12);

    SeededRng rng(5, 0);
    for (int d : {2, 4, 7}) {
        ComplexVector psi = random_state_vector(d, rng);
        ComplexVector phi = random_state_vector(d, rng);
        double overlap = std::norm(psi.dot(phi));
        EXPECT_NEAR(fidelity(DensityMatrix::pure(psi), DensityMatrix::pure(phi)), overlap, 1e-10);
        DensityMatrix rho = random_mixed_hs(d, rng);
        EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
    }
}

TEST(Fidelity, SymmetricAndUnitarilyInvariant) {
    SeededRng rng(6, 0);
    for (int d = 2; d <= 8; ++d) {
        for (int trial = 0; trial < 5; ++trial) {
            DensityMatrix a = trial % 2 == 0 ? random_mixed_bures(d, rng) : random_pure_fubini_study(d, rng);
            DensityMatrix b = random_mixed_hs(d, rng);
            ComplexMatrix u = haar_unitary(d, rng);
            const double fab = fidelity(a, b);
            EXPECT_NEAR(fab, fidelity(b, a), 1e-9);
            ComplexMatrix ua = u * a.matrix() * u.adjoint();
            ComplexMatrix ub = u * b.matrix() * u.adjoint();
            DensityMatrix ra(0.5 * (ua + ua.adjoint()));
            DensityMatrix rb(0.5 * (ub + ub.adjoint()));
            EXPECT_NEAR(fab, fidelity(ra, rb), 1e-9);
            EXPECT_GE(fab, 0.0);
            EXPECT_LE(fab, 1.0);
        }
    }
}

TEST(Fidelity, DimensionMismatchRejected) {
    DensityMatrix a(ComplexMatrix::Identity(2, 2) / 2.0);
    DensityMatrix b(ComplexMatrix::Identity(3, 3) / 3.0);
    EXPECT_THROW(fidelity(a, b), std::invalid_argument);
}

ComplexMatrix in_eigenbasis(const ComplexMatrix &rho, const ComplexMatrix &u) {
    UnitaryEigen e = unitary_eigen(u);
    return e.vectors.adjoint() * rho * e.vectors;
}

TEST(DiagonalRecovery, QubitQuadratic) {
    SeededRng rng(7, 0);
    for (int trial = 0; trial < 10; ++trial) {
        DensityMatrix rho = random_pure_fubini_study(2, rng);
        const ComplexMatrix &m = rho.matrix();
        const bool first_larger = m(0, 0).real() >= m(1, 1).real();
        DensityMatrix plain = pure_state_diagonal_recovery(m);
        // Without a hint the larger population is placed first.
        EXPECT_NEAR(plain.matrix()(0, 0).real(), std::max(m(0, 0).real(), m(1, 1).real()), 1e-10);
        EXPECT_NEAR((plain.matrix()(0, 0) * plain.matrix()(1, 1)).real(), std::norm(m(0, 1)), 1e-10);

        RealVector w(2);
        w << 1.0, -1.0;
        DiagonalHint hint{w, (m(0, 0) - m(1, 1)).real()};
        DensityMatrix hinted = pure_state_diagonal_recovery(m, hint);
        EXPECT_LT(max_abs(hinted.matrix() - m), 1e-10);
        if (first_larger) {
            EXPECT_LT(max_abs(plain.matrix() - m), 1e-10);
        }
    }
}

TEST(DiagonalRecovery, RandomPureStateInHaarEigenbasis) {
    SeededRng rng(8, 0);
    for (int trial = 0; trial < 10; ++trial) {
        ComplexMatrix u = haar_unitary(5, rng);
        DensityMatrix rho = random_pure_fubini_study(5, rng);
        ComplexMatrix m = in_eigenbasis(rho.matrix(), u);
        ComplexMatrix off = m;
        off.diagonal().setZero();
        DensityMatrix rec = pure_state_diagonal_recovery(off);
        EXPECT_LT((rec.matrix().diagonal() - m.diagonal()).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(rec.purity(), 1.0, 1e-8);
    }
}

TEST(DiagonalRecovery, EigenstateIsAmbiguous) {
    SeededRng rng(9, 0);
    ComplexMatrix u = haar_unitary(4, rng);
    UnitaryEigen e = unitary_eigen(u);
    DensityMatrix rho = DensityMatrix::pure(e.vectors.col(2));
    EXPECT_THROW(pure_state_diagonal_recovery(in_eigenbasis(rho.matrix(), u)), EigenstateAmbiguity);
}

TEST(PurityPrior, ResolvesZeroCostAmbiguityAtDThree) {
    // At d=3 the saturated record leaves one diagonal direction free, and for
    // some pure states the zero-cost set is a segment rather than a point.
    const int d = 3;
    OperatorBasis basis(d);
    HermitianOperator jz = spin_matrices(1.0).jz;
    int ambiguous = 0;
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        SeededRng rng(seed, 1);
        ComplexMatrix u = haar_unitary(d, rng);
        DesignMatrix design = design_matrix(build_orbit(u, jz, d * d - d), basis);
        RealMatrix c = covariance(design);
        SeededRng state_rng(seed, 2);
        DensityMatrix truth = random_pure_fubini_study(d, state_rng);
        SeededRng unused(0, 0);
        MlEstimate ml = ml_estimate(design, simulate_record(truth, build_orbit(u, jz, d * d - d), 1.0, 0.0, unused), 1.0);
        FitResult fit = positivity_fit(ml, c, basis);
        FitResult pure = apply_purity_prior(fit, ml, c, basis, unitary_eigen(u).vectors, jz);
        ambiguous += fidelity(fit.rho_bar, truth) < 0.99 ? 1 : 0;
        EXPECT_GT(fidelity(pure.rho_bar, truth), 1.0 - 1e-7) << "seed " << seed;
        EXPECT_NEAR(pure.rho_bar.purity(), 1.0, 1e-9);
        EXPECT_LT(pure.cost, 1e-12);
    }
    EXPECT_GT(ambiguous, 0);
}

TEST(PurityPrior, NeverRaisesCostOnShortRecords) {
    const int d = 4;
    OperatorBasis basis(d);
    HermitianOperator jz = spin_matrices(1.5).jz;
    SeededRng rng(11, 1);
    ComplexMatrix u = haar_unitary(d, rng);
    OperatorOrbit orbit = build_orbit(u, jz, d * d - d);
    DesignMatrix design = design_matrix(orbit, basis);
    ComplexMatrix vectors = unitary_eigen(u).vectors;
    int kept = 0;
    for (int n = 1; n <= d * d - d + 1; ++n) {
        SeededRng state_rng(n, 2);
        DensityMatrix truth = random_pure_fubini_study(d, state_rng);
        SeededRng unused(0, 0);
        MeasurementRecord record = simulate_record(truth, orbit, 1.0, 0.0, unused).prefix(n);
        DesignMatrix prefix = design.prefix(n);
        RealMatrix c = covariance(prefix);
        MlEstimate ml = ml_estimate(prefix, record, 1.0);
        FitResult fit = positivity_fit(ml, c, basis);
        FitResult pure = apply_purity_prior(fit, ml, c, basis, vectors, jz);
        EXPECT_LE(pure.cost, fit.cost + 1e-9 * std::max(1.0, c.norm())) << "n=" << n;
        kept += pure.cost == fit.cost && pure.rho_bar.matrix() == fit.rho_bar.matrix() ? 1 : 0;
    }
    EXPECT_GT(kept, 0);
}

TEST(PurityPrior, RejectsMismatchedDimensions) {
    OperatorBasis basis(3);
    SeededRng rng(1, 1);
    ComplexMatrix u = haar_unitary(3, rng);
    DesignMatrix design = design_matrix(build_orbit(u, spin_matrices(1.0).jz, 6), basis);
    SeededRng unused(0, 0);
    DensityMatrix rho = random_pure_fubini_study(3, unused);
    MlEstimate ml = ml_estimate(design, simulate_record(rho, build_orbit(u, spin_matrices(1.0).jz, 6), 1.0, 0.0, unused), 1.0);
    RealMatrix c = covariance(design);
    FitResult fit = positivity_fit(ml, c, basis);
    EXPECT_THROW(apply_purity_prior(fit, ml, c, basis, ComplexMatrix::Identity(2, 2), spin_matrices(1.0).jz),
                 std::invalid_argument);
}

}  // namespace
}  // namespace orbit_tomo
