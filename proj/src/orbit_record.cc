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

#include "orbit_tomo/orbit_record.h"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <string>

namespace orbit_tomo {

DesignMatrix DesignMatrix::prefix(int n) const {
    if (n < 0 || n > rows()) {
        throw std::invalid_argument("DesignMatrix::prefix: length " + std::to_string(n) + " out of range");
    }
    return DesignMatrix{d, entries.topRows(n)};
}

MeasurementRecord MeasurementRecord::prefix(int n) const {
    if (n < 0 || n > length()) {
        throw std::invalid_argument("MeasurementRecord::prefix: length " + std::to_string(n) + " out of range");
    }
    MeasurementRecord out = *this;
    out.values = values.head(n);
    return out;
}

OperatorOrbit build_orbit(const ComplexMatrix &u0, const HermitianOperator &o0, int n_max) {
    if (n_max < 0) {
        throw std::invalid_argument("build_orbit: n_max must be non-negative");
    }
    if (u0.rows() != o0.dim() || u0.cols() != o0.dim()) {
        throw std::invalid_argument("build_orbit: unitary is " + std::to_string(u0.rows()) + "x" +
                                    std::to_string(u0.cols()) + " but observable has dimension " +
                                    std::to_string(o0.dim()));
    }
    if (!is_unitary(u0, 1e-12)) {
        throw std::invalid_argument("build_orbit: u0 is not unitary to within 1e-12");
    }
    std::vector<HermitianOperator> ops;
    ops.reserve(static_cast<size_t>(n_max) + 1);
    ops.push_back(o0);
    ComplexMatrix u_adj = u0.adjoint();
    for (int n = 0; n < n_max; ++n) {
        ComplexMatrix next = u_adj * ops.back().matrix() * u0;
        ops.push_back(HermitianOperator::hermitian_part(next));
    }
    return OperatorOrbit(u0, o0, std::move(ops));
}

DesignMatrix design_matrix(const OperatorOrbit &orbit, const OperatorBasis &basis) {
    if (orbit.dim() != basis.dim()) {
        throw std::invalid_argument("design_matrix: orbit dimension " + std::to_string(orbit.dim()) +
                                    " does not match basis dimension " + std::to_string(basis.dim()));
    }
    RealMatrix entries(orbit.length(), basis.size());
    for (int n = 0; n < orbit.length(); ++n) {
        entries.row(n) = basis.project(orbit[n].matrix()).transpose();
    }
    return DesignMatrix{basis.dim(), std::move(entries)};
}

RealMatrix covariance(const DesignMatrix &design) {
    RealMatrix c = design.entries.transpose() * design.entries;
    return 0.5 * (c + c.transpose());
}

MeasurementRecord simulate_record(const DensityMatrix &rho0, const OperatorOrbit &orbit, double ensemble_size,
                                  double sigma, SeededRng &rng) {
    if (rho0.dim() != orbit.dim()) {
        throw std::invalid_argument("simulate_record: state dimension " + std::to_string(rho0.dim()) +
                                    " does not match orbit dimension " + std::to_string(orbit.dim()));
    }
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("simulate_record: sigma must be non-negative");
    }
    MeasurementRecord record;
    record.values.resize(orbit.length());
    record.ensemble_size = ensemble_size;
    record.noise_sigma = sigma;
    record.seed = rng.seed();
    for (int n = 0; n < orbit.length(); ++n) {
        double expectation = (orbit[n].matrix() * rho0.matrix()).trace().real();
        double noise = sigma > 0.0 ? sigma * rng.normal() : 0.0;
        record.values[n] = ensemble_size * expectation + noise;
    }
    return record;
}

int numerical_rank(const RealVector &singular_values, Eigen::Index rows, Eigen::Index cols) {
    if (singular_values.size() == 0) {
        return 0;
    }
    double largest = singular_values.maxCoeff();
    if (!(largest > 0.0)) {
        return 0;
    }
    double threshold = static_cast<double>(std::max(rows, cols)) * kRankEpsilon * largest;
    return static_cast<int>((singular_values.array() >= threshold).count());
}

int numerical_rank(const RealMatrix &m) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::BDCSVD<RealMatrix> svd(m);
    return numerical_rank(svd.singularValues(), m.rows(), m.cols());
}

std::string format_double(double v) {
    char buf[64];
    auto result = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, result.ptr);
}

void write_csv(std::ostream &out, const RealMatrix &m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

void write_design_csv(std::ostream &out, const DesignMatrix &design) {
    write_csv(out, design.entries);
}

void write_record_csv(std::ostream &out, const MeasurementRecord &record) {
    out << "n,value\n";
    for (int n = 0; n < record.length(); ++n) {
        out << n << ',' << format_double(record.values[n]) << '\n';
    }
}

}  // namespace orbit_tomo
