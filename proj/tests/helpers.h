// Copyright 2026 The qae Authors
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

#ifndef QAE_TESTS_HELPERS_H
#define QAE_TESTS_HELPERS_H

#include <random>

#include "qae/linops.h"
#include "qae/rng.h"

namespace qae::testing {

inline cvec random_vector(std::size_t d, Rng &rng) {
    std::normal_distribution<double> g;
    cvec v(static_cast<Eigen::Index>(d));
    for (auto &x : v) {
        x = cplx(g(rng), g(rng));
    }
    return v;
}

inline StateVector random_state(std::size_t n, Rng &rng) {
    return StateVector::normalized(random_vector(dim_of(n), rng));
}

inline cmat random_matrix(std::size_t d, Rng &rng) {
    std::normal_distribution<double> g;
    cmat m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (auto &x : m.reshaped()) {
        x = cplx(g(rng), g(rng));
    }
    return m;
}

/// Mixed state from a random Ginibre factor.
inline DensityMatrix random_density(std::size_t n, Rng &rng) {
    cmat g = random_matrix(dim_of(n), rng);
    cmat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(cmat(0.5 * (rho + rho.adjoint())));
}

/// Haar-ish unitary from the QR decomposition of a Ginibre matrix.
inline cmat random_unitary(std::size_t d, Rng &rng) {
    Eigen::HouseholderQR<cmat> qr(random_matrix(d, rng));
    return qr.householderQ();
}

inline HermitianGenerator random_generator(std::size_t f, double scale, Rng &rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> c(HermitianGenerator::size_for(f));
    for (auto &x : c) {
        x = u(rng);
    }
    return HermitianGenerator(f, std::move(c));
}

inline double max_abs_diff(const cmat &a, const cmat &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Matrix of the unitary exp(i K) via its Taylor series, independent of the eigendecomposition.
inline cmat taylor_exp_i(const cmat &k) {
    const Eigen::Index d = k.rows();
    int squarings = 0;
    double norm = k.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        norm /= 2;
        squarings++;
    }
    cmat a = cplx(0, 1) * k / std::pow(2.0, squarings);
    cmat term = cmat::Identity(d, d), sum = cmat::Identity(d, d);
    for (int t = 1; t < 30; t++) {
        term = term * a / static_cast<double>(t);
        sum += term;
    }
    for (int s = 0; s < squarings; s++) {
        sum = sum * sum;
    }
    return sum;
}

}  // namespace qae::testing

#endif
