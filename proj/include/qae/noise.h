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

#ifndef QAE_NOISE_H
#define QAE_NOISE_H

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qae/linops.h"
#include "qae/rng.h"
#include "qae/states.h"

namespace qae {

struct SpinFlipSpec {
    double p = 0;
};

struct BrownianSpec {
    double q = 0;
    std::size_t steps = 20;
};

struct DepolarizingSpec {
    double p_u = 0;
};

using NoiseStage = std::variant<SpinFlipSpec, BrownianSpec, DepolarizingSpec>;

inline void validate(const SpinFlipSpec &s) {
    if (!(s.p >= 0 && s.p <= 0.5)) {
        throw std::invalid_argument("spin-flip probability must lie in [0, 0.5]");
    }
}

inline void validate(const BrownianSpec &s) {
    if (!(s.q >= 0) || s.steps < 1) {
        throw std::invalid_argument("brownian noise needs q >= 0 and at least one step");
    }
}

inline void validate(const DepolarizingSpec &s) {
    if (!(s.p_u >= 0 && s.p_u <= 1)) {
        throw std::invalid_argument("depolarizing probability must lie in [0, 1]");
    }
}

inline std::string stage_kind(const NoiseStage &stage) {
    struct {
        std::string operator()(const SpinFlipSpec &) const {
            return "spin_flip";
        }
        std::string operator()(const BrownianSpec &) const {
            return "brownian";
        }
        std::string operator()(const DepolarizingSpec &) const {
            return "depolarizing";
        }
    } v;
    return std::visit(v, stage);
}

/// The headline parameter of a stage (p, q or p_u).
inline double stage_value(const NoiseStage &stage) {
    struct {
        double operator()(const SpinFlipSpec &s) const {
            return s.p;
        }
        double operator()(const BrownianSpec &s) const {
            return s.q;
        }
        double operator()(const DepolarizingSpec &s) const {
            return s.p_u;
        }
    } v;
    return std::visit(v, stage);
}

inline void set_stage_value(NoiseStage &stage, double value) {
    std::visit(
        [value](auto &s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SpinFlipSpec>) {
                s.p = value;
            } else if constexpr (std::is_same_v<T, BrownianSpec>) {
                s.q = value;
            } else {
                s.p_u = value;
            }
        },
        stage);
}

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Short decimal form for labels ("0.2" rather than "0.20000000000000001").
inline std::string format_short(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

/// Ordered sequence of noise stages applied first to last.
struct NoiseSpec {
    std::vector<NoiseStage> stages;

    NoiseSpec() = default;
    explicit NoiseSpec(std::vector<NoiseStage> s) : stages(std::move(s)) {
        validate_all();
    }

    static NoiseSpec spin_flip(double p) {
        return NoiseSpec({SpinFlipSpec{p}});
    }
    static NoiseSpec brownian(double q, std::size_t steps = 20) {
        return NoiseSpec({BrownianSpec{q, steps}});
    }

    void validate_all() const {
        if (stages.empty()) {
            throw std::invalid_argument("noise spec needs at least one stage");
        }
        for (const auto &s : stages) {
            std::visit([](const auto &x) { validate(x); }, s);
        }
    }

    bool has_spin_flip() const {
        for (const auto &s : stages) {
            if (std::holds_alternative<SpinFlipSpec>(s)) {
                return true;
            }
        }
        return false;
    }

    bool is_pure_spin_flip() const {
        return stages.size() == 1 && std::holds_alternative<SpinFlipSpec>(stages[0]);
    }

    /// e.g. "spin_flip(p=0.2)>brownian(q=0.3,n=20)".
    std::string describe() const {
        std::ostringstream out;
        for (std::size_t i = 0; i < stages.size(); i++) {
            if (i) {
                out << '>';
            }
            const auto &s = stages[i];
            if (auto *f = std::get_if<SpinFlipSpec>(&s)) {
                out << "spin_flip(p=" << format_short(f->p) << ")";
            } else if (auto *b = std::get_if<BrownianSpec>(&s)) {
                out << "brownian(q=" << format_short(b->q) << ",n=" << b->steps << ")";
            } else if (auto *d = std::get_if<DepolarizingSpec>(&s)) {
                out << "depolarizing(p_u=" << format_short(d->p_u) << ")";
            }
        }
        return out.str();
    }
};

/// Per-qubit flip probability (1 - e^{-2 Gamma T}) / 2 after flipping at rate Gamma for time T.
inline double flip_probability(double gamma_t) {
    if (!(gamma_t >= 0)) {
        throw std::invalid_argument("flip_probability: Gamma*T must be non-negative");
    }
    return -0.5 * std::expm1(-2 * gamma_t);
}

/// p sigma^x_j rho sigma^x_j + (1 - p) rho, concatenated over every qubit j.
inline DensityMatrix spinflip_channel(double p, const DensityMatrix &rho) {
    validate(SpinFlipSpec{p});
    const std::size_t n = rho.num_qubits();
    const auto d = static_cast<Eigen::Index>(rho.dim());
    cmat cur = rho.entries();
    cmat next(d, d);
    for (std::size_t j = 0; j < n; j++) {
        auto bit = static_cast<Eigen::Index>(qubit_bit(j, n));
        for (Eigen::Index c = 0; c < d; c++) {
            for (Eigen::Index r = 0; r < d; r++) {
                next(r, c) = p * cur(r ^ bit, c ^ bit) + (1 - p) * cur(r, c);
            }
        }
        std::swap(cur, next);
    }
    return DensityMatrix(std::move(cur));
}

/// p_u (tr_j rho) (x) Id/2 on qubit j, + (1 - p_u) rho, concatenated over every qubit j.
inline DensityMatrix depolarizing_channel(double p_u, const DensityMatrix &rho) {
    validate(DepolarizingSpec{p_u});
    const std::size_t n = rho.num_qubits();
    const auto d = static_cast<Eigen::Index>(rho.dim());
    cmat cur = rho.entries();
    cmat next(d, d);
    for (std::size_t j = 0; j < n; j++) {
        auto bit = static_cast<Eigen::Index>(qubit_bit(j, n));
        for (Eigen::Index c = 0; c < d; c++) {
            for (Eigen::Index r = 0; r < d; r++) {
                cplx replaced = 0;
                if ((r & bit) == (c & bit)) {
                    Eigen::Index r0 = r & ~bit, c0 = c & ~bit;
                    replaced = 0.5 * (cur(r0, c0) + cur(r0 | bit, c0 | bit));
                }
                next(r, c) = p_u * replaced + (1 - p_u) * cur(r, c);
            }
        }
        std::swap(cur, next);
    }
    return DensityMatrix(std::move(cur));
}

/// Each qubit is included independently with probability p.
inline FlipSubset sample_flip_subset(double p, std::size_t m, Rng &rng) {
    validate(SpinFlipSpec{p});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::set<std::size_t> j;
    for (std::size_t q = 0; q < m; q++) {
        if (u(rng) < p) {
            j.insert(q);
        }
    }
    return FlipSubset(std::move(j), m);
}

/// Gaussian Hermitian matrix: real diagonal with std `sigma`, complex off-diagonal entries
/// with independent real and imaginary parts of std sigma/sqrt(2).
inline cmat random_hermitian(std::size_t dim, double sigma, Rng &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    cmat h(d, d);
    const double off = sigma / std::numbers::sqrt2;
    for (Eigen::Index i = 0; i < d; i++) {
        h(i, i) = sigma * g(rng);
        for (Eigen::Index j = i + 1; j < d; j++) {
            double re = off * g(rng);
            double im = off * g(rng);
            h(i, j) = cplx(re, im);
            h(j, i) = cplx(re, -im);
        }
    }
    return h;
}

/// Entry standard deviation of each step generator: 2 pi q / sqrt(2^m n).
inline double brownian_step_sigma(const BrownianSpec &spec, std::size_t m) {
    return 2 * std::numbers::pi * spec.q / std::sqrt(static_cast<double>(dim_of(m) * spec.steps));
}

/// U = exp(i G_n) ... exp(i G_1) with independent Gaussian Hermitian step generators G_j.
inline cmat sample_brownian_unitary(const BrownianSpec &spec, std::size_t m, Rng &rng) {
    validate(spec);
    if (m < 1) {
        throw std::invalid_argument("brownian unitary needs at least one qubit");
    }
    const auto d = static_cast<Eigen::Index>(dim_of(m));
    cmat u = cmat::Identity(d, d);
    if (spec.q == 0) {
        return u;
    }
    const double sigma = brownian_step_sigma(spec, m);
    for (std::size_t s = 0; s < spec.steps; s++) {
        ExpDecomposition step(random_hermitian(dim_of(m), sigma, rng), m);
        u = step.unitary * u;
    }
    return u;
}

struct NoisySample {
    StateVector state;
    std::optional<std::size_t> flip_count;  // total |J| over spin-flip stages, absent without one
};

/// One experimental shot: sampled flips and sampled unitaries in stage order.
inline NoisySample sample_noisy_state(const NoiseSpec &spec, const StateVector &psi, Rng &rng) {
    spec.validate_all();
    NoisySample out{psi, std::nullopt};
    for (const auto &stage : spec.stages) {
        if (auto *f = std::get_if<SpinFlipSpec>(&stage)) {
            FlipSubset j = sample_flip_subset(f->p, psi.num_qubits(), rng);
            out.state = apply_flips(out.state, j);
            out.flip_count = out.flip_count.value_or(0) + j.size();
        } else if (auto *b = std::get_if<BrownianSpec>(&stage)) {
            cmat u = sample_brownian_unitary(*b, psi.num_qubits(), rng);
            out.state = StateVector::normalized(u * out.state.amplitudes());
        } else {
            throw std::invalid_argument("depolarizing noise has no pure-state shot model");
        }
    }
    return out;
}

inline StateVector apply_noise_to_pure(const NoiseSpec &spec, const StateVector &psi, Rng &rng) {
    return sample_noisy_state(spec, psi, rng).state;
}

}  // namespace qae

#endif
