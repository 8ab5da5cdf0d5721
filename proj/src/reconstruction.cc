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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace orbit_tomo {

namespace {

constexpr double kNewtonDecrementTolerance = 1e-10;
constexpr double kArmijo = 0.25;
constexpr double kPairZero = 1e-12;

double largest_eigenvalue(const RealMatrix &c) {
    if (c.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(c, Eigen::EigenvaluesOnly);
    return std::max(solver.eigenvalues().maxCoeff(), 0.0);
}

ComplexMatrix unit_trace_matrix(const OperatorBasis &basis, const RealVector &r) {
    ComplexMatrix m = basis.combine(r);
    m.diagonal().array() += 1.0 / basis.dim();
    return m;
}

// log det of a Hermitian matrix, or nullopt when it is not positive definite.
std::optional<double> log_det_pd(const ComplexMatrix &m) {
    Eigen::LLT<ComplexMatrix> llt(m);
    if (llt.info() != Eigen::Success) {
        return std::nullopt;
    }
    const ComplexMatrix &l = llt.matrixLLT();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        double diag = l(i, i).real();
        if (!(diag > 0.0)) {
            return std::nullopt;
        }
        sum += std::log(diag);
    }
    return 2.0 * sum;
}

struct SolverOutput {
  RealVector r;
  int iterations = 0;
  bool converged = false;
};

// Minimizes t f(r) - log det rho(r) for an increasing sequence of t. Each
// centering step is a damped Newton iteration; the Hessian of -log det in
// coordinates is H_ab = Tr(W E_a W E_b) with W = rho^-1, whose column b is
// the coordinate vector of W E_b W.
SolverOutput solve_barrier(const RealVector &r_ml, const RealMatrix &c, const OperatorBasis &basis,
                           double scale, const FitOptions &options) {
    const int d = basis.dim();
    const int m = basis.size();
    SolverOutput out;
    out.r = RealVector::Zero(m);

    auto cost = [&](const RealVector &r) { return seminorm_cost(r, r_ml, c); };
    double t = 1.0 / scale;
    const double gap_target = options.gap_tolerance * scale;

    std::vector<ComplexMatrix> dense_basis;
    dense_basis.reserve(static_cast<size_t>(m));
    for (const auto &e : basis.elements()) {
        dense_basis.push_back(e.matrix());
    }

    RealMatrix hessian(m, m);
    while (true) {
        bool centered = false;
        while (out.iterations < options.max_newton_steps) {
            ComplexMatrix rho = unit_trace_matrix(basis, out.r);
            HermitianEigen eig = eigh(rho);
            if (!(eig.values[0] > 0.0)) {
                throw NumericalError("positivity_fit: barrier iterate left the PSD cone");
            }
            ComplexMatrix w = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.adjoint();
            RealVector diff = out.r - r_ml;
            RealVector grad = 2.0 * t * (c * diff) - basis.project(w);
            for (int b = 0; b < m; ++b) {
                hessian.col(b) = basis.project(w * dense_basis[b] * w);
            }
            hessian = 0.5 * (hessian + hessian.transpose()).eval();
            hessian += 2.0 * t * c;

            Eigen::LLT<RealMatrix> llt(hessian);
            RealVector step;
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(grad);
            } else {
                step = -hessian.ldlt().solve(grad);
            }
            double decrement_sq = -grad.dot(step);
            if (!(decrement_sq >= 0.0) || !std::isfinite(decrement_sq)) {
                throw NumericalError("positivity_fit: Newton system is not positive definite");
            }
            if (0.5 * decrement_sq <= kNewtonDecrementTolerance) {
                centered = true;
                break;
            }

            auto log_det_now = log_det_pd(rho);
            double phi_now = t * cost(out.r) - log_det_now.value_or(0.0);
            double s = 1.0;
            bool accepted = false;
            // Below this the Armijo decrease is lost in the rounding of phi.
            const double resolution = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi_now));
            while (s > 1e-14 && kArmijo * s * decrement_sq > resolution) {
                RealVector trial = out.r + s * step;
                auto ld = log_det_pd(unit_trace_matrix(basis, trial));
                if (ld) {
                    double phi_trial = t * cost(trial) - *ld;
                    if (phi_trial <= phi_now - kArmijo * s * decrement_sq) {
                        out.r = std::move(trial);
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            ++out.iterations;
            if (!accepted) {
                // No progress possible at this t; the iterate is as centered as
                // floating point allows.
                centered = true;
                break;
            }
        }
        if (!centered) {
            out.converged = false;
            return out;
        }
        if (d / t <= gap_target) {
            out.converged = true;
            return out;
        }
        t *= options.barrier_growth;
    }
}

SolverOutput solve_projected_gradient(const RealVector &r_ml, const RealMatrix &c, const OperatorBasis &basis,
                                      double scale, const FitOptions &options) {
    auto project = [&](const RealVector &r) {
        return basis.project(project_to_density(unit_trace_matrix(basis, r)));
    };
    auto cost = [&](const RealVector &r) { return seminorm_cost(r, r_ml, c); };

    SolverOutput out;
    RealVector x = project(r_ml);
    RealVector y = x;
    double momentum = 1.0;
    double f_prev = cost(x);
    for (int it = 1; it <= options.max_iterations; ++it) {
        RealVector x_next = project(y - (c * (y - r_ml)) / scale);
        double f_next = cost(x_next);
        out.iterations = it;
        if (f_next > f_prev) {
            // Restart: drop momentum and retry from the last accepted point.
            momentum = 1.0;
            y = x;
            continue;
        }
        double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x);
        momentum = momentum_next;
        double change = f_prev - f_next;
        bool stalled = (x_next - x).lpNorm<Eigen::Infinity>() <= 1e-15;
        x = std::move(x_next);
        if (change <= options.relative_tolerance * std::max(f_prev, std::numeric_limits<double>::min()) ||
            stalled) {
            f_prev = f_next;
            out.converged = true;
            break;
        }
        f_prev = f_next;
    }
    out.r = std::move(x);
    return out;
}

}  // namespace

LinearInverter::LinearInverter(const DesignMatrix &design) : d_(design.d), rows_(design.rows()) {
    const int m = design.cols();
    if (d_ < 2 || m != d_ * d_ - 1) {
        throw std::invalid_argument("LinearInverter: design matrix must have d^2 - 1 columns");
    }
    pinv_ = RealMatrix::Zero(m, rows_);
    range_basis_ = RealMatrix::Zero(m, 0);
    if (rows_ == 0) {
        return;
    }
    Eigen::BDCSVD<RealMatrix> svd(design.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector &sv = svd.singularValues();
    rank_ = numerical_rank(sv, design.rows(), design.cols());
    const RealMatrix &u = svd.matrixU();
    const RealMatrix &v = svd.matrixV();
    range_basis_ = v.leftCols(rank_);
    pinv_ = v.leftCols(rank_) * sv.head(rank_).cwiseInverse().asDiagonal() * u.leftCols(rank_).transpose();
}

RealMatrix LinearInverter::range_projector() const {
    return range_basis_ * range_basis_.transpose();
}

MlEstimate LinearInverter::estimate(const MeasurementRecord &record, double ensemble_size) const {
    if (record.length() != rows_) {
        throw std::invalid_argument("ml_estimate: record has " + std::to_string(record.length()) +
                                    " values but the design has " + std::to_string(rows_) + " rows");
    }
    if (!(ensemble_size > 0.0)) {
        throw std::invalid_argument("ml_estimate: ensemble size must be positive");
    }
    RealVector r = rows_ == 0 ? RealVector::Zero(pinv_.rows()) : RealVector(pinv_ * record.values / ensemble_size);
    return MlEstimate{CoordinateVector(d_, std::move(r)), rank_, rank_ < d_ * d_ - 1};
}

MlEstimate ml_estimate(const DesignMatrix &design, const MeasurementRecord &record, double ensemble_size) {
    return LinearInverter(design).estimate(record, ensemble_size);
}

double seminorm_cost(const RealVector &r, const RealVector &r_ml, const RealMatrix &c) {
    RealVector diff = r - r_ml;
    return std::max(diff.dot(c * diff), 0.0);
}

std::string_view to_string(FitMethod method) {
    switch (method) {
        case FitMethod::barrier:
            return "barrier";
        case FitMethod::projected_gradient:
            return "projected_gradient";
    }
    return "unknown";
}

FitMethod parse_fit_method(std::string_view name) {
    if (name == "barrier") {
        return FitMethod::barrier;
    }
    if (name == "projected_gradient" || name == "pgd") {
        return FitMethod::projected_gradient;
    }
    throw std::invalid_argument("unknown fit method '" + std::string(name) +
                                "' (expected barrier or projected_gradient)");
}

RealVector project_to_simplex(const RealVector &v) {
    const Eigen::Index n = v.size();
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0;
    double theta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        running += sorted[j];
        double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) {
            theta = candidate;
        }
    }
    return (v.array() - theta).cwiseMax(0.0);
}

ComplexMatrix project_to_density(const ComplexMatrix &h) {
    HermitianEigen eig = eigh(h);
    RealVector w = project_to_simplex(eig.values);
    ComplexMatrix rho = eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

DensityMatrix clip_to_density(const HermitianOperator &h) {
    HermitianEigen eig = eigh(h);
    RealVector w = eig.values.cwiseMax(0.0);
    double total = w.sum();
    if (!(total > 0.0)) {
        throw NumericalError("clip_to_density: no positive eigenvalues to keep");
    }
    w /= total;
    ComplexMatrix rho = eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
    return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

FitResult positivity_fit(const MlEstimate &ml, const RealMatrix &c, const OperatorBasis &basis,
                         const FitOptions &options) {
    const int d = basis.dim();
    const int m = basis.size();
    if (ml.r_ml.dim_d() != d) {
        throw std::invalid_argument("positivity_fit: estimate dimension does not match basis");
    }
    if (c.rows() != m || c.cols() != m) {
        throw std::invalid_argument("positivity_fit: covariance must be " + std::to_string(m) + "x" +
                                    std::to_string(m));
    }
    const RealVector &r_ml = ml.r_ml.values();
    ComplexMatrix rho_ml = unit_trace_matrix(basis, r_ml);
    HermitianOperator rho_ml_op = HermitianOperator::hermitian_part(rho_ml);
    if (eigh(rho_ml_op).values[0] >= -kPsdTolerance) {
        return FitResult{DensityMatrix(rho_ml_op), ml.r_ml, 0.0, 0, true, false};
    }

    DensityMatrix baseline = clip_to_density(rho_ml_op);
    RealVector baseline_r = basis.project(baseline.matrix());
    double baseline_cost = seminorm_cost(baseline_r, r_ml, c);

    double scale = largest_eigenvalue(c);
    if (!(scale > 0.0)) {
        // Empty record: every density matrix costs nothing.
        return FitResult{baseline, CoordinateVector(d, baseline_r), 0.0, 0, true, true};
    }

    SolverOutput solved = options.method == FitMethod::barrier
                              ? solve_barrier(r_ml, c, basis, scale, options)
                              : solve_projected_gradient(r_ml, c, basis, scale, options);

    ComplexMatrix rho = unit_trace_matrix(basis, solved.r);
    HermitianEigen eig = eigh(rho);
    if (eig.values[0] < 0.0) {
        // Projected-gradient iterates sit on the boundary; remove rounding-level
        // negative eigenvalues so the result is a valid state.
        rho = project_to_density(rho);
        solved.r = basis.project(rho);
    }
    double cost = seminorm_cost(solved.r, r_ml, c);
    if (cost > baseline_cost) {
        return FitResult{baseline, CoordinateVector(d, baseline_r), baseline_cost, solved.iterations,
                         solved.converged, true};
    }
    return FitResult{DensityMatrix(0.5 * (rho + rho.adjoint())), CoordinateVector(d, solved.r), cost,
                     solved.iterations, solved.converged, false};
}

double fidelity(const DensityMatrix &a, const DensityMatrix &b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    const double floor = 32.0 * a.dim() * std::numeric_limits<double>::epsilon();
    auto root = [floor](const ComplexMatrix &rho) {
        HermitianEigen eig = eigh(rho);
        RealVector roots(eig.values.size());
        for (Eigen::Index i = 0; i < roots.size(); ++i) {
            double v = eig.values[i];
            if (v < -kPsdTolerance) {
                throw std::invalid_argument("fidelity: argument has eigenvalue " + std::to_string(v));
            }
            // Eigenvalues at rounding level are zero; their square roots would
            // otherwise inject ~1e-8 noise.
            roots[i] = v <= floor ? 0.0 : std::sqrt(v);
        }
        return ComplexMatrix(eig.vectors * roots.asDiagonal() * eig.vectors.adjoint());
    };
    ComplexMatrix product = root(a.matrix()) * root(b.matrix());
    Eigen::JacobiSVD<ComplexMatrix> svd(product);
    double trace_norm = svd.singularValues().sum();
    double f = trace_norm * trace_norm;
    if (f > 1.0 + kPsdTolerance) {
        throw NumericalError("fidelity: value " + std::to_string(f) + " exceeds 1");
    }
    return std::clamp(f, 0.0, 1.0);
}

namespace {

// Recovery without the final density-matrix validation. With inexact input
// the result is only approximately positive.
ComplexMatrix recover_pure_matrix(const ComplexMatrix &elements, const std::optional<DiagonalHint> &hint) {
    if (elements.rows() != elements.cols() || elements.rows() < 2) {
        throw std::invalid_argument("pure_state_diagonal_recovery: expected a square matrix of dimension >= 2");
    }
    const int d = static_cast<int>(elements.rows());
    if (hint && hint->weights.size() != d) {
        throw std::invalid_argument("pure_state_diagonal_recovery: hint weights have the wrong length");
    }
    RealMatrix mag = RealMatrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            double a = std::abs(elements(j, k));
            double v = a > kPairZero ? a : 0.0;
            mag(j, k) = v;
            mag(k, j) = v;
        }
    }
    if (mag.maxCoeff() == 0.0) {
        throw EigenstateAmbiguity(
            "pure_state_diagonal_recovery: all off-diagonal elements vanish; the state is an eigenstate of U0");
    }

    RealVector diag = RealVector::Zero(d);
    std::vector<int> unresolved;
    for (int i = 0; i < d; ++i) {
        if (mag.row(i).maxCoeff() == 0.0) {
            continue;
        }
        double best = 0.0;
        double value = 0.0;
        for (int j = 0; j < d; ++j) {
            for (int k = j + 1; k < d; ++k) {
                if (j == i || k == i) {
                    continue;
                }
                double weight = mag(i, j) * mag(i, k) * mag(j, k);
                if (weight > best) {
                    best = weight;
                    value = mag(i, j) * mag(i, k) / mag(j, k);
                }
            }
        }
        if (best > 0.0) {
            diag[i] = value;
        } else {
            unresolved.push_back(i);
        }
    }

    if (!unresolved.empty()) {
        if (unresolved.size() != 2 || mag(unresolved[0], unresolved[1]) == 0.0) {
            throw std::invalid_argument("pure_state_diagonal_recovery: off-diagonal pattern is not that of a pure state");
        }
        const int p = unresolved[0];
        const int q = unresolved[1];
        double remaining = 1.0 - diag.sum();
        double product = mag(p, q) * mag(p, q);
        double disc = std::sqrt(std::max(remaining * remaining - 4.0 * product, 0.0));
        double hi = 0.5 * (remaining + disc);
        double lo = 0.5 * (remaining - disc);
        diag[p] = hi;
        diag[q] = lo;
        if (hint) {
            RealVector swapped = diag;
            swapped[p] = lo;
            swapped[q] = hi;
            double miss = std::abs(hint->weights.dot(diag) - hint->value);
            double miss_swapped = std::abs(hint->weights.dot(swapped) - hint->value);
            if (miss_swapped < miss) {
                diag = swapped;
            }
        }
    }

    ComplexMatrix rho(d, d);
    for (int j = 0; j < d; ++j) {
        rho(j, j) = diag[j];
        for (int k = j + 1; k < d; ++k) {
            rho(j, k) = mag(j, k) > 0.0 ? elements(j, k) : Complex(0.0, 0.0);
            rho(k, j) = std::conj(rho(j, k));
        }
    }
    double trace = diag.sum();
    if (!(trace > 0.0)) {
        throw std::invalid_argument("pure_state_diagonal_recovery: recovered populations sum to zero");
    }
    rho /= trace;
    return rho;
}

}  // namespace

DensityMatrix pure_state_diagonal_recovery(const ComplexMatrix &elements, const std::optional<DiagonalHint> &hint) {
    return DensityMatrix(recover_pure_matrix(elements, hint));
}

FitResult apply_purity_prior(const FitResult &fit, const MlEstimate &ml, const RealMatrix &c,
                             const OperatorBasis &basis, const ComplexMatrix &eigenvectors,
                             const HermitianOperator &observable) {
    const int d = basis.dim();
    if (eigenvectors.rows() != d || eigenvectors.cols() != d || observable.dim() != d) {
        throw std::invalid_argument("apply_purity_prior: eigenvectors and observable must be " + std::to_string(d) +
                                    "-dimensional");
    }
    // The unconstrained estimate is exact on every measured direction, which
    // includes the off-diagonals once the record saturates.
    const ComplexMatrix rho_eig = eigenvectors.adjoint() * unit_trace_matrix(basis, ml.r_ml.values()) * eigenvectors;
    // The U0-invariant part of the observable is measured at every step, so
    // its overlap with the estimate picks between two-level roots.
    DiagonalHint hint;
    hint.weights = (eigenvectors.adjoint() * observable.matrix() * eigenvectors).diagonal().real();
    hint.value = hint.weights.dot(rho_eig.diagonal().real());

    ComplexVector psi;
    try {
        HermitianEigen e = eigh(HermitianOperator::hermitian_part(recover_pure_matrix(rho_eig, hint)));
        psi = eigenvectors * e.vectors.col(d - 1);
    } catch (const std::invalid_argument &) {
        return fit;
    } catch (const std::domain_error &) {
        return fit;
    }
    DensityMatrix candidate = DensityMatrix::pure(psi / psi.norm());
    RealVector r = basis.project(candidate.matrix());
    const double cost = seminorm_cost(r, ml.r_ml.values(), c);
    const double tie = 1e-9 * std::max(1.0, largest_eigenvalue(c));
    if (!(cost <= fit.cost + tie)) {
        return fit;
    }
    return FitResult{std::move(candidate), CoordinateVector(d, std::move(r)), cost, fit.iterations, fit.converged,
                     fit.used_baseline};
}

}  // namespace orbit_tomo
