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

#ifndef QAE_STATES_H
#define QAE_STATES_H

#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>

#include "qae/linops.h"

namespace qae {

/// GHZ state (|up...up> + e^{i phase}|down...down>)/sqrt(2); phase is reduced into [0, 2 pi).
struct GhzSpec {
    std::size_t num_qubits = 2;
    double phase = 0;

    GhzSpec() = default;
    GhzSpec(std::size_t m, double phi) : num_qubits(m), phase(std::fmod(phi, 2 * std::numbers::pi)) {
        if (m < 2) {
            throw std::invalid_argument("GHZ state needs at least 2 qubits");
        }
        if (phase < 0) {
            phase += 2 * std::numbers::pi;
        }
        if (phase >= 2 * std::numbers::pi) {
            phase = 0;
        }
    }
};

/// The subset J of flipped qubits (0-based indices).
struct FlipSubset {
    std::set<std::size_t> flipped;
    std::size_t num_qubits = 0;

    FlipSubset() = default;
    FlipSubset(std::set<std::size_t> j, std::size_t m) : flipped(std::move(j)), num_qubits(m) {
        if (!flipped.empty() && *flipped.rbegin() >= m) {
            throw std::out_of_range("flipped qubit index out of range");
        }
    }

    std::size_t size() const {
        return flipped.size();
    }

    /// Basis-index XOR mask of the flipped qubits.
    std::size_t mask() const {
        std::size_t out = 0;
        for (std::size_t q : flipped) {
            out |= qubit_bit(q, num_qubits);
        }
        return out;
    }
};

struct TrainingPair {
    StateVector input;
    StateVector reference;
};

struct LabeledTestState {
    StateVector noisy;
    StateVector ideal;
    std::optional<std::size_t> flip_count;
};

inline StateVector ghz(const GhzSpec &spec) {
    if (spec.num_qubits < 2) {
        throw std::invalid_argument("GHZ state needs at least 2 qubits");
    }
    auto d = static_cast<Eigen::Index>(dim_of(spec.num_qubits));
    cvec v = cvec::Zero(d);
    v(0) = std::numbers::sqrt2 / 2;
    v(d - 1) = std::polar(std::numbers::sqrt2 / 2, spec.phase);
    return StateVector(std::move(v));
}

inline StateVector ghz(std::size_t m, double phase) {
    return ghz(GhzSpec(m, phase));
}

/// prod_{j in J} sigma^x_j |psi>.
inline StateVector apply_flips(const StateVector &psi, const FlipSubset &j) {
    if (psi.num_qubits() != j.num_qubits) {
        throw std::invalid_argument("apply_flips: qubit count mismatch");
    }
    const std::size_t mask = j.mask();
    if (mask == 0) {
        return psi;
    }
    cvec out(psi.amplitudes().size());
    for (std::size_t i = 0; i < psi.dim(); i++) {
        out(static_cast<Eigen::Index>(i ^ mask)) = psi[i];
    }
    return StateVector(std::move(out));
}

}  // namespace qae

#endif
