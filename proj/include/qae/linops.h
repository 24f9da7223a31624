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

#ifndef QAE_LINOPS_H
#define QAE_LINOPS_H

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qae {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;

// Qubit 0 is the most significant bit of a computational-basis index.
// |up> is bit value 0 and |down> is bit value 1.
inline constexpr std::size_t kUp = 0;
inline constexpr std::size_t kDown = 1;

inline std::size_t dim_of(std::size_t num_qubits) {
    return std::size_t{1} << num_qubits;
}

inline bool is_power_of_2(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

inline std::size_t floor_lg2(std::size_t n) {
    std::size_t r = 0;
    while (n >>= 1) {
        r++;
    }
    return r;
}

/// Bit mask selecting qubit `q` of an `n`-qubit basis index.
inline std::size_t qubit_bit(std::size_t q, std::size_t n) {
    return std::size_t{1} << (n - 1 - q);
}

/// A normalized pure state on `num_qubits` qubits.
class StateVector {
   public:
    StateVector() = default;

    /// Throws std::invalid_argument unless the length is a power of two and the norm is 1 within 1e-10.
    explicit StateVector(cvec amplitudes) : amplitudes_(std::move(amplitudes)) {
        if (!is_power_of_2(static_cast<std::size_t>(amplitudes_.size()))) {
            throw std::invalid_argument("state vector length must be a power of two");
        }
        num_qubits_ = floor_lg2(static_cast<std::size_t>(amplitudes_.size()));
        if (std::abs(amplitudes_.norm() - 1.0) > 1e-10) {
            throw std::invalid_argument("state vector is not normalized");
        }
    }

    /// Rescales to unit norm. Throws on a zero vector.
    static StateVector normalized(cvec amplitudes) {
        double n = amplitudes.norm();
        if (!(n > 0)) {
            throw std::invalid_argument("cannot normalize a zero vector");
        }
        amplitudes /= n;
        return StateVector(std::move(amplitudes));
    }

    static StateVector basis(std::size_t num_qubits, std::size_t index) {
        cvec v = cvec::Zero(static_cast<Eigen::Index>(dim_of(num_qubits)));
        if (index >= dim_of(num_qubits)) {
            throw std::out_of_range("basis index out of range");
        }
        v(static_cast<Eigen::Index>(index)) = 1.0;
        return StateVector(std::move(v));
    }

    const cvec &amplitudes() const {
        return amplitudes_;
    }
    std::size_t num_qubits() const {
        return num_qubits_;
    }
    std::size_t dim() const {
        return static_cast<std::size_t>(amplitudes_.size());
    }
    cplx operator[](std::size_t i) const {
        return amplitudes_(static_cast<Eigen::Index>(i));
    }

    /// |psi><psi|
    cmat projector() const {
        return amplitudes_ * amplitudes_.adjoint();
    }

    bool operator==(const StateVector &other) const {
        return num_qubits_ == other.num_qubits_ && amplitudes_ == other.amplitudes_;
    }

   private:
    cvec amplitudes_{cvec::Ones(1)};
    std::size_t num_qubits_ = 0;
};

/// A Hermitian, unit-trace, positive semidefinite matrix on `num_qubits` qubits.
/// Construction checks Hermiticity and trace; `min_eigenvalue` exposes the PSD check.
class DensityMatrix {
   public:
    DensityMatrix() = default;

    explicit DensityMatrix(cmat entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols() || !is_power_of_2(static_cast<std::size_t>(entries_.rows()))) {
            throw std::invalid_argument("density matrix must be square with power-of-two dimension");
        }
        num_qubits_ = floor_lg2(static_cast<std::size_t>(entries_.rows()));
        if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
            throw std::invalid_argument("density matrix is not Hermitian");
        }
        if (std::abs(entries_.trace() - cplx(1.0)) > 1e-10) {
            throw std::invalid_argument("density matrix trace is not 1");
        }
    }

    explicit DensityMatrix(const StateVector &psi) : entries_(psi.projector()), num_qubits_(psi.num_qubits()) {
    }

    static DensityMatrix maximally_mixed(std::size_t num_qubits) {
        auto d = static_cast<Eigen::Index>(dim_of(num_qubits));
        return DensityMatrix(cmat(cmat::Identity(d, d) / static_cast<double>(d)));
    }

    const cmat &entries() const {
        return entries_;
    }
    std::size_t num_qubits() const {
        return num_qubits_;
    }
    std::size_t dim() const {
        return static_cast<std::size_t>(entries_.rows());
    }
    cplx operator()(std::size_t r, std::size_t c) const {
        return entries_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<cmat> es(entries_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    bool is_psd(double tol = 1e-9) const {
        return min_eigenvalue() >= -tol;
    }

   private:
    cmat entries_{cmat::Ones(1, 1)};
    std::size_t num_qubits_ = 0;
};

inline StateVector tensor(const StateVector &a, const StateVector &b) {
    cvec out(static_cast<Eigen::Index>(a.dim() * b.dim()));
    for (std::size_t i = 0; i < a.dim(); i++) {
        out.segment(static_cast<Eigen::Index>(i * b.dim()), static_cast<Eigen::Index>(b.dim())) = a[i] * b.amplitudes();
    }
    return StateVector::normalized(std::move(out));
}

inline cmat kron(const cmat &a, const cmat &b) {
    cmat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    return DensityMatrix(kron(a.entries(), b.entries()));
}

/// Reduced state on `keep` (qubit indices, any order; result uses ascending order).
inline DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const std::size_t> keep) {
    const std::size_t n = rho.num_qubits();
    if (keep.empty()) {
        throw std::invalid_argument("partial_trace: keep set is empty");
    }
    std::vector<std::size_t> kept(keep.begin(), keep.end());
    std::sort(kept.begin(), kept.end());
    if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
        throw std::invalid_argument("partial_trace: duplicate qubit index");
    }
    if (kept.back() >= n) {
        throw std::out_of_range("partial_trace: qubit index out of range");
    }
    std::vector<std::size_t> traced;
    for (std::size_t q = 0; q < n; q++) {
        if (!std::binary_search(kept.begin(), kept.end(), q)) {
            traced.push_back(q);
        }
    }

    auto scatter = [n](std::size_t local, const std::vector<std::size_t> &qubits) {
        std::size_t idx = 0;
        const std::size_t t = qubits.size();
        for (std::size_t i = 0; i < t; i++) {
            if (local & (std::size_t{1} << (t - 1 - i))) {
                idx |= qubit_bit(qubits[i], n);
            }
        }
        return idx;
    };

    const std::size_t dk = dim_of(kept.size());
    const std::size_t dt = dim_of(traced.size());
    std::vector<std::size_t> kept_idx(dk), traced_idx(dt);
    for (std::size_t i = 0; i < dk; i++) {
        kept_idx[i] = scatter(i, kept);
    }
    for (std::size_t i = 0; i < dt; i++) {
        traced_idx[i] = scatter(i, traced);
    }

    cmat out = cmat::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < dk; r++) {
        for (std::size_t c = 0; c < dk; c++) {
            cplx s = 0;
            for (std::size_t t : traced_idx) {
                s += rho(kept_idx[r] | t, kept_idx[c] | t);
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s;
        }
    }
    return DensityMatrix(std::move(out));
}

inline DensityMatrix partial_trace(const DensityMatrix &rho, std::initializer_list<std::size_t> keep) {
    return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// Index bookkeeping for acting on an ordered list of target qubits inside an `n`-qubit register.
/// Local index bit order follows the target list (first target is the local most significant bit).
struct QubitSelection {
    std::vector<std::size_t> offsets;  // global index offset of each local basis state
    std::vector<std::size_t> bases;    // every global index whose target bits are all zero

    QubitSelection(std::span<const std::size_t> targets, std::size_t n) {
        const std::size_t t = targets.size();
        if (t > n) {
            throw std::invalid_argument("more target qubits than register qubits");
        }
        std::size_t mask = 0;
        for (std::size_t q : targets) {
            if (q >= n) {
                throw std::out_of_range("target qubit out of range");
            }
            std::size_t bit = qubit_bit(q, n);
            if (mask & bit) {
                throw std::invalid_argument("duplicate target qubit");
            }
            mask |= bit;
        }
        offsets.resize(dim_of(t));
        for (std::size_t k = 0; k < offsets.size(); k++) {
            std::size_t off = 0;
            for (std::size_t i = 0; i < t; i++) {
                if (k & (std::size_t{1} << (t - 1 - i))) {
                    off |= qubit_bit(targets[i], n);
                }
            }
            offsets[k] = off;
        }
        bases.reserve(dim_of(n) >> t);
        for (std::size_t i = 0; i < dim_of(n); i++) {
            if ((i & mask) == 0) {
                bases.push_back(i);
            }
        }
    }
};

/// Left-multiplies every column of `w` by `op` acting on the selected qubits.
inline void apply_on_qubits(cmat &w, const cmat &op, const QubitSelection &sel) {
    const std::size_t k = sel.offsets.size();
    std::vector<cplx> buf(k);
    for (Eigen::Index c = 0; c < w.cols(); c++) {
        cplx *col = w.col(c).data();
        for (std::size_t base : sel.bases) {
            for (std::size_t l = 0; l < k; l++) {
                buf[l] = col[base + sel.offsets[l]];
            }
            for (std::size_t r = 0; r < k; r++) {
                cplx s = 0;
                for (std::size_t l = 0; l < k; l++) {
                    s += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) * buf[l];
                }
                col[base + sel.offsets[r]] = s;
            }
        }
    }
}

/// tr_rest(W Y^dagger) expressed in the local basis of the selected qubits.
inline cmat local_outer_trace(const cmat &w, const cmat &y, const QubitSelection &sel) {
    const std::size_t k = sel.offsets.size();
    cmat g = cmat::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < w.cols(); c++) {
        const cplx *wc = w.col(c).data();
        const cplx *yc = y.col(c).data();
        for (std::size_t base : sel.bases) {
            for (std::size_t r = 0; r < k; r++) {
                cplx a = wc[base + sel.offsets[r]];
                if (a == cplx(0)) {
                    continue;
                }
                for (std::size_t l = 0; l < k; l++) {
                    g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) +=
                        a * std::conj(yc[base + sel.offsets[l]]);
                }
            }
        }
    }
    return g;
}

/// Full 2^total matrix acting as `u` on `targets` (in order) and identity elsewhere.
inline cmat embed_unitary(const cmat &u, std::span<const std::size_t> targets, std::size_t total) {
    if (u.rows() != u.cols() || static_cast<std::size_t>(u.rows()) != dim_of(targets.size())) {
        throw std::invalid_argument("embed_unitary: operator size does not match target count");
    }
    QubitSelection sel(targets, total);
    auto d = static_cast<Eigen::Index>(dim_of(total));
    cmat out = cmat::Identity(d, d);
    apply_on_qubits(out, u, sel);
    return out;
}

inline cmat embed_unitary(const cmat &u, std::initializer_list<std::size_t> targets, std::size_t total) {
    return embed_unitary(u, std::span<const std::size_t>(targets.begin(), targets.size()), total);
}

/// Pauli string with base-4 digits of `index` selecting {I, X, Y, Z} per qubit, qubit 0 first.
/// P|c> = phase(c) |c ^ flip_mask>.
struct PauliString {
    std::size_t flip_mask = 0;   // bits where the factor is X or Y
    std::size_t y_mask = 0;
    std::size_t z_mask = 0;

    PauliString(std::size_t index, std::size_t f) {
        if (f >= 32 || index >= (std::size_t{1} << (2 * f))) {
            throw std::out_of_range("pauli index out of range");
        }
        for (std::size_t q = 0; q < f; q++) {
            std::size_t digit = (index >> (2 * (f - 1 - q))) & 3;
            std::size_t bit = qubit_bit(q, f);
            if (digit == 1 || digit == 2) {
                flip_mask |= bit;
            }
            if (digit == 2) {
                y_mask |= bit;
            }
            if (digit == 3) {
                z_mask |= bit;
            }
        }
    }

    /// Matrix entry P[c ^ flip_mask, c].
    cplx phase(std::size_t c) const {
        // Y|0> = i|1>, Y|1> = -i|0>; Z|b> = (-1)^b |b>.
        int ny = std::popcount(y_mask);
        int y_down = std::popcount(y_mask & c);
        int z_down = std::popcount(z_mask & c);
        int sign = ((y_down + z_down) & 1) ? -1 : 1;
        static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return static_cast<double>(sign) * kIPow[ny & 3];
    }
};

inline cmat pauli_string(std::size_t index, std::size_t f) {
    PauliString p(index, f);
    auto d = static_cast<Eigen::Index>(dim_of(f));
    cmat out = cmat::Zero(d, d);
    for (std::size_t c = 0; c < dim_of(f); c++) {
        out(static_cast<Eigen::Index>(c ^ p.flip_mask), static_cast<Eigen::Index>(c)) = p.phase(c);
    }
    return out;
}

/// Hermitian matrix sum_a theta_a P_a over the non-identity Pauli strings on `num_qubits` qubits.
/// coefficients[i] multiplies the Pauli string with index i + 1.
class HermitianGenerator {
   public:
    HermitianGenerator() = default;

    HermitianGenerator(std::size_t num_qubits, std::vector<double> coefficients)
        : num_qubits_(num_qubits), coefficients_(std::move(coefficients)) {
        if (coefficients_.size() != size_for(num_qubits)) {
            throw std::invalid_argument("generator coefficient count must be 4^f - 1");
        }
    }

    static HermitianGenerator zero(std::size_t num_qubits) {
        return HermitianGenerator(num_qubits, std::vector<double>(size_for(num_qubits), 0.0));
    }

    static std::size_t size_for(std::size_t num_qubits) {
        return (std::size_t{1} << (2 * num_qubits)) - 1;
    }

    std::size_t num_qubits() const {
        return num_qubits_;
    }
    const std::vector<double> &coefficients() const {
        return coefficients_;
    }
    std::vector<double> &coefficients() {
        return coefficients_;
    }

    cmat matrix() const {
        auto d = static_cast<Eigen::Index>(dim_of(num_qubits_));
        cmat k = cmat::Zero(d, d);
        for (std::size_t a = 0; a < coefficients_.size(); a++) {
            double theta = coefficients_[a];
            if (theta == 0) {
                continue;
            }
            PauliString p(a + 1, num_qubits_);
            for (std::size_t c = 0; c < dim_of(num_qubits_); c++) {
                k(static_cast<Eigen::Index>(c ^ p.flip_mask), static_cast<Eigen::Index>(c)) += theta * p.phase(c);
            }
        }
        return k;
    }

    bool operator==(const HermitianGenerator &) const = default;

   private:
    std::size_t num_qubits_ = 0;
    std::vector<double> coefficients_;
};

/// Eigenvalues closer than this use the analytic limit in divided differences.
inline constexpr double kEigenCoincidence = 1e-8;

/// exp(iK) together with the eigendecomposition K = V diag(lambda) V^dagger and the
/// first divided differences of x -> e^{ix} over eigenvalue pairs.
struct ExpDecomposition {
    std::size_t num_qubits = 0;
    rvec eigenvalues;
    cmat eigenvectors;
    cmat unitary;
    cmat divided_differences;

    explicit ExpDecomposition(const HermitianGenerator &k) : ExpDecomposition(k.matrix(), k.num_qubits()) {
    }

    ExpDecomposition(const cmat &hermitian, std::size_t qubits) : num_qubits(qubits) {
        Eigen::SelfAdjointEigenSolver<cmat> es(hermitian);
        eigenvalues = es.eigenvalues();
        eigenvectors = es.eigenvectors();
        const Eigen::Index d = eigenvalues.size();
        cvec phases(d);
        for (Eigen::Index i = 0; i < d; i++) {
            phases(i) = std::polar(1.0, eigenvalues(i));
        }
        unitary = eigenvectors * phases.asDiagonal() * eigenvectors.adjoint();
        divided_differences.resize(d, d);
        for (Eigen::Index i = 0; i < d; i++) {
            for (Eigen::Index j = 0; j < d; j++) {
                double gap = eigenvalues(i) - eigenvalues(j);
                if (std::abs(gap) < kEigenCoincidence) {
                    divided_differences(i, j) = cplx(0, 1) * phases(i);
                } else {
                    divided_differences(i, j) = (phases(i) - phases(j)) / gap;
                }
            }
        }
    }

    /// Derivative of exp(iK) along the Hermitian direction `direction`.
    cmat derivative(const cmat &direction) const {
        cmat inner = eigenvectors.adjoint() * direction * eigenvectors;
        return eigenvectors * divided_differences.cwiseProduct(inner) * eigenvectors.adjoint();
    }

    /// For every non-identity Pauli index a (result entry a - 1), returns tr(dU/dtheta_a * G).
    cvec pullback(const cmat &g) const {
        cmat inner = eigenvectors.adjoint() * g * eigenvectors;
        cmat z = eigenvectors * divided_differences.transpose().cwiseProduct(inner) * eigenvectors.adjoint();
        const std::size_t d = dim_of(num_qubits);
        const std::size_t count = HermitianGenerator::size_for(num_qubits);
        cvec out(static_cast<Eigen::Index>(count));
        for (std::size_t a = 0; a < count; a++) {
            PauliString p(a + 1, num_qubits);
            cplx s = 0;
            for (std::size_t c = 0; c < d; c++) {
                s += p.phase(c) * z(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c ^ p.flip_mask));
            }
            out(static_cast<Eigen::Index>(a)) = s;
        }
        return out;
    }
};

inline cmat exp_hermitian(const HermitianGenerator &k) {
    return ExpDecomposition(k).unitary;
}

/// dU/dtheta_a for U = exp(iK); `direction` is a non-identity Pauli index (1 .. 4^f - 1).
inline cmat exp_hermitian_derivative(const HermitianGenerator &k, std::size_t direction) {
    if (direction == 0 || direction > k.coefficients().size()) {
        throw std::out_of_range("generator direction out of range");
    }
    return ExpDecomposition(k).derivative(pauli_string(direction, k.num_qubits()));
}

/// <psi|rho|psi>, clamped to [0, 1].
inline double fidelity_pure(const cmat &rho, const cvec &psi) {
    if (rho.rows() != psi.size() || rho.cols() != psi.size()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    cplx f = psi.dot(rho * psi);
    return std::clamp(f.real(), 0.0, 1.0);
}

inline double fidelity_pure(const DensityMatrix &rho, const StateVector &psi) {
    return fidelity_pure(rho.entries(), psi.amplitudes());
}

inline double fidelity_pure(const StateVector &phi, const StateVector &psi) {
    if (phi.dim() != psi.dim()) {
        throw std::invalid_argument("fidelity: dimension mismatch");
    }
    return std::clamp(std::norm(psi.amplitudes().dot(phi.amplitudes())), 0.0, 1.0);
}

inline bool is_unitary(const cmat &u, double tol) {
    if (u.rows() != u.cols()) {
        return false;
    }
    return ((u * u.adjoint()) - cmat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qae

#endif
