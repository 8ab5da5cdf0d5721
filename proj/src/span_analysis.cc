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

#include "orbit_tomo/span_analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace orbit_tomo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_to_two_pi(double x) {
    double w = std::fmod(x, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    if (w >= kTwoPi) {
        w -= kTwoPi;
    }
    return w;
}

double wrap_to_pi(double x) {
    double w = wrap_to_two_pi(x);
    return w > std::numbers::pi ? w - kTwoPi : w;
}

void require_unitary_square(const ComplexMatrix &u0, const char *what) {
    if (u0.rows() != u0.cols() || u0.rows() == 0) {
        throw std::invalid_argument(std::string(what) + ": unitary must be square and non-empty");
    }
    if (!is_unitary(u0, 1e-10)) {
        throw std::invalid_argument(std::string(what) + ": matrix is not unitary");
    }
}

}  // namespace

UnitaryEigen unitary_eigen(const ComplexMatrix &u0) {
    const Eigen::Index d = u0.rows();
    Eigen::ComplexSchur<ComplexMatrix> schur(u0);
    if (schur.info() != Eigen::Success) {
        throw NumericalError("unitary_eigen: Schur decomposition failed to converge");
    }
    const ComplexMatrix &t = schur.matrixT();
    const ComplexMatrix &z = schur.matrixU();

    std::vector<int> order(static_cast<size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> phase(static_cast<size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        phase[i] = -std::arg(t(i, i));
        if (phase[i] <= -std::numbers::pi) {
            phase[i] += kTwoPi;
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return phase[a] < phase[b]; });

    UnitaryEigen out;
    out.eigenvalues.resize(d);
    out.phases.resize(d);
    out.vectors.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        int src = order[i];
        out.eigenvalues[i] = t(src, src);
        out.phases[i] = phase[src];
        out.vectors.col(i) = z.col(src);
    }
    out.min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            out.min_gap = std::min(out.min_gap, std::abs(out.eigenvalues[i] - out.eigenvalues[j]));
        }
    }
    return out;
}

std::vector<std::vector<int>> eigenvalue_clusters(const ComplexVector &eigenvalues, double tolerance) {
    const int d = static_cast<int>(eigenvalues.size());
    std::vector<int> parent(static_cast<size_t>(d));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (std::abs(eigenvalues[i] - eigenvalues[j]) < tolerance) {
                int a = find(i);
                int b = find(j);
                if (a != b) {
                    parent[std::max(a, b)] = std::min(a, b);
                }
            }
        }
    }
    std::vector<std::vector<int>> clusters;
    std::vector<int> slot(static_cast<size_t>(d), -1);
    for (int i = 0; i < d; ++i) {
        int root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[slot[root]].push_back(i);
    }
    return clusters;
}

int commutant_dimension(const ComplexMatrix &u0) {
    require_unitary_square(u0, "commutant_dimension");
    UnitaryEigen eig = unitary_eigen(u0);
    int total = 0;
    for (const auto &cluster : eigenvalue_clusters(eig.eigenvalues)) {
        int m = static_cast<int>(cluster.size());
        total += m * m;
    }
    return total - 1;
}

int missing_subspace_dimension(const ComplexMatrix &u0, const HermitianOperator &o0) {
    require_unitary_square(u0, "missing_subspace_dimension");
    if (o0.dim() != u0.rows()) {
        throw std::invalid_argument("missing_subspace_dimension: observable dimension does not match unitary");
    }
    const int d = o0.dim();
    UnitaryEigen eig = unitary_eigen(u0);
    auto clusters = eigenvalue_clusters(eig.eigenvalues);
    int dim_g = -1;
    // Orthogonal projection of O onto the commutant: the block-diagonal part
    // of O in the eigenbasis, minus its trace part.
    ComplexMatrix o_eig = eig.vectors.adjoint() * o0.matrix() * eig.vectors;
    ComplexMatrix block_part = ComplexMatrix::Zero(d, d);
    for (const auto &cluster : clusters) {
        int m = static_cast<int>(cluster.size());
        dim_g += m * m;
        for (int a : cluster) {
            for (int b : cluster) {
                block_part(a, b) = o_eig(a, b);
            }
        }
    }
    block_part.diagonal().array() -= o0.trace() / d;
    double scale = std::max(1.0, max_abs(o0.matrix()));
    bool overlaps = max_abs(block_part) > kDefaultElementTolerance * scale;
    return overlaps ? dim_g - 1 : dim_g;
}

int span_dimension(const OperatorOrbit &orbit, const OperatorBasis &basis) {
    return numerical_rank(design_matrix(orbit, basis).entries);
}

SaturationReport check_saturation(const ComplexMatrix &u0, const HermitianOperator &o0, double tol_phase,
                                  double tol_element) {
    require_unitary_square(u0, "check_saturation");
    if (o0.dim() != u0.rows()) {
        throw std::invalid_argument("check_saturation: observable dimension does not match unitary");
    }
    const int d = o0.dim();
    UnitaryEigen eig = unitary_eigen(u0);
    ComplexMatrix o_eig = eig.vectors.adjoint() * o0.matrix() * eig.vectors;

    SaturationReport report;
    report.eigenphases = eig.phases;
    report.reliable = eig.min_gap >= kEigenvalueGapWarning;

    for (int j = 0; j < d; ++j) {
        if (std::abs(o_eig(j, j)) > tol_element) {
            report.cond_diag_nonzero = true;
            report.diag_witness = j;
            break;
        }
    }

    report.cond_offdiag_nonzero = true;
    for (int j = 0; j < d && report.cond_offdiag_nonzero; ++j) {
        for (int k = j + 1; k < d; ++k) {
            if (std::abs(o_eig(k, j)) <= tol_element) {
                report.cond_offdiag_nonzero = false;
                report.offdiag_failure = {j, k};
                break;
            }
        }
    }

    // Sort the d^2 - d ordered differences together with the constant node on
    // the circle and look for adjacent gaps below tol_phase.
    struct Node {
      double angle;
      std::pair<int, int> pair;
    };
    std::vector<Node> nodes;
    nodes.reserve(static_cast<size_t>(d) * (d - 1) + 1);
    nodes.push_back({0.0, {-1, -1}});
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            if (j != k) {
                nodes.push_back({wrap_to_two_pi(eig.phases[j] - eig.phases[k]), {j, k}});
            }
        }
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node &a, const Node &b) {
        return a.angle < b.angle || (a.angle == b.angle && a.pair < b.pair);
    });
    const size_t count = nodes.size();
    for (size_t i = 0; i + 1 < count; ++i) {
        if (nodes[i + 1].angle - nodes[i].angle <= tol_phase) {
            report.collisions.push_back({nodes[i].pair, nodes[i + 1].pair});
        }
    }
    if (count > 1 && nodes.front().angle + kTwoPi - nodes.back().angle <= tol_phase) {
        report.collisions.push_back({nodes.back().pair, nodes.front().pair});
    }
    report.cond_phase_differences_distinct = report.collisions.empty();

    report.saturated =
        report.cond_diag_nonzero && report.cond_offdiag_nonzero && report.cond_phase_differences_distinct;
    return report;
}

void to_json(nlohmann::json &j, const SaturationReport &report) {
    nlohmann::json collisions = nlohmann::json::array();
    for (const auto &c : report.collisions) {
        collisions.push_back({{"first", {c.first.first, c.first.second}},
                              {"second", {c.second.first, c.second.second}}});
    }
    std::vector<double> phases(report.eigenphases.data(), report.eigenphases.data() + report.eigenphases.size());
    j = nlohmann::json{
        {"cond_diag_nonzero", report.cond_diag_nonzero},
        {"diag_witness", report.diag_witness},
        {"cond_offdiag_nonzero", report.cond_offdiag_nonzero},
        {"offdiag_failure", {report.offdiag_failure.first, report.offdiag_failure.second}},
        {"cond_phase_differences_distinct", report.cond_phase_differences_distinct},
        {"phase_collisions", collisions},
        {"eigenphases", phases},
        {"reliable", report.reliable},
        {"saturated", report.saturated},
    };
}

bool VandermondeDet::is_zero() const {
    return std::isinf(log_abs) && log_abs < 0.0;
}

Complex VandermondeDet::value() const {
    if (is_zero()) {
        return {0.0, 0.0};
    }
    return std::polar(std::exp(log_abs), arg);
}

VandermondeDet vandermonde_det(const ComplexVector &nodes) {
    VandermondeDet det;
    const Eigen::Index n = nodes.size();
    double arg_sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            Complex diff = nodes[k] - nodes[j];
            double mag = std::abs(diff);
            if (mag == 0.0) {
                det.log_abs = -std::numeric_limits<double>::infinity();
                det.arg = 0.0;
                return det;
            }
            det.log_abs += std::log(mag);
            arg_sum = wrap_to_pi(arg_sum + std::arg(diff));
        }
    }
    det.arg = arg_sum;
    return det;
}

ComplexVector orbit_vandermonde_nodes(const RealVector &phases) {
    const Eigen::Index d = phases.size();
    ComplexVector nodes(d * (d - 1) + 1);
    nodes[0] = 1.0;
    Eigen::Index m = 1;
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
            if (j != k) {
                nodes[m++] = std::polar(1.0, -(phases[j] - phases[k]));
            }
        }
    }
    return nodes;
}

}  // namespace orbit_tomo
