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

#ifndef QAE_DATASET_H
#define QAE_DATASET_H

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qae/noise.h"
#include "qae/parallel.h"
#include "qae/qnn.h"
#include "qae/rng.h"
#include "qae/states.h"

namespace qae {

struct TargetCount {
    GhzSpec target;
    std::size_t count = 0;
};

/// Test states whose phases are drawn uniformly from the open interval (low, high).
struct RandomPhaseTests {
    std::size_t count = 0;
    double low = 0;
    double high = std::numbers::pi;
};

struct DatasetPlan {
    std::size_t num_qubits = 0;
    std::vector<TargetCount> train;
    std::vector<TargetCount> test;
    std::optional<RandomPhaseTests> random_test;
};

struct Dataset {
    std::size_t num_qubits = 0;
    std::uint64_t seed = 0;
    std::string noise;
    std::vector<TrainingPair> pairs;
    std::vector<LabeledTestState> tests;
};

/// Training pairs are two independent shots of the same noise on the same ideal state.
/// Item i of every role draws from its own sub-stream of `seed`, so the result is independent of `threads`.
inline Dataset build_dataset(const DatasetPlan &plan, const NoiseSpec &noise, std::uint64_t seed,
                             std::size_t threads = 1) {
    noise.validate_all();
    std::vector<GhzSpec> train_targets, test_targets;
    for (const auto &tc : plan.train) {
        if (tc.count < 1) {
            throw std::invalid_argument("every training target needs at least one pair");
        }
        if (tc.target.num_qubits != plan.num_qubits) {
            throw std::invalid_argument("training target has the wrong qubit count");
        }
        train_targets.insert(train_targets.end(), tc.count, tc.target);
    }
    for (const auto &tc : plan.test) {
        if (tc.target.num_qubits != plan.num_qubits) {
            throw std::invalid_argument("test target has the wrong qubit count");
        }
        test_targets.insert(test_targets.end(), tc.count, tc.target);
    }
    if (plan.random_test) {
        for (std::size_t i = 0; i < plan.random_test->count; i++) {
            Rng rng = make_stream(seed, stream::kTestPhase, i);
            test_targets.emplace_back(plan.num_qubits,
                                      uniform_open(rng, plan.random_test->low, plan.random_test->high));
        }
    }

    Dataset out;
    out.num_qubits = plan.num_qubits;
    out.seed = seed;
    out.noise = noise.describe();
    std::vector<std::optional<TrainingPair>> pairs(train_targets.size());
    parallel_for(train_targets.size(), threads, [&](std::size_t i) {
        StateVector ideal = ghz(train_targets[i]);
        Rng in_rng = make_stream(seed, stream::kTrainInput, i);
        Rng ref_rng = make_stream(seed, stream::kTrainReference, i);
        pairs[i] = TrainingPair{apply_noise_to_pure(noise, ideal, in_rng), apply_noise_to_pure(noise, ideal, ref_rng)};
    });
    std::vector<std::optional<LabeledTestState>> tests(test_targets.size());
    parallel_for(test_targets.size(), threads, [&](std::size_t i) {
        StateVector ideal = ghz(test_targets[i]);
        Rng rng = make_stream(seed, stream::kTest, i);
        NoisySample s = sample_noisy_state(noise, ideal, rng);
        tests[i] = LabeledTestState{std::move(s.state), std::move(ideal), s.flip_count};
    });
    for (auto &p : pairs) {
        out.pairs.push_back(std::move(*p));
    }
    for (auto &t : tests) {
        out.tests.push_back(std::move(*t));
    }
    return out;
}

// Text format, version 1:
//   # qae-states v1 num_qubits=<m> seed=<seed> noise=<description>
//   <role>,<index>,<flips>,<re_0>,<im_0>,...,<re_{2^m-1}>,<im_{2^m-1}>
// role is input | reference (training pairs), noisy | ideal (test states) or state (unlabeled).
// flips is the sampled |J| of a noisy test state and empty otherwise.

struct StateRecord {
    std::string role;
    std::size_t index = 0;
    std::optional<std::size_t> flips;
    StateVector state;
};

struct StatesFile {
    std::size_t num_qubits = 0;
    std::uint64_t seed = 0;
    std::string noise;
    std::vector<StateRecord> records;
};

inline StatesFile to_states_file(const Dataset &d) {
    StatesFile f{d.num_qubits, d.seed, d.noise, {}};
    for (std::size_t i = 0; i < d.pairs.size(); i++) {
        f.records.push_back({"input", i, std::nullopt, d.pairs[i].input});
        f.records.push_back({"reference", i, std::nullopt, d.pairs[i].reference});
    }
    for (std::size_t i = 0; i < d.tests.size(); i++) {
        f.records.push_back({"noisy", i, d.tests[i].flip_count, d.tests[i].noisy});
        f.records.push_back({"ideal", i, std::nullopt, d.tests[i].ideal});
    }
    return f;
}

inline void write_states(std::ostream &out, const StatesFile &f) {
    out << "# qae-states v1 num_qubits=" << f.num_qubits << " seed=" << f.seed << " noise=" << f.noise << '\n';
    char buf[64];
    for (const auto &r : f.records) {
        out << r.role << ',' << r.index << ',';
        if (r.flips) {
            out << *r.flips;
        }
        for (std::size_t i = 0; i < r.state.dim(); i++) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", r.state[i].real(), r.state[i].imag());
            out << buf;
        }
        out << '\n';
    }
}

inline StatesFile read_states(std::istream &in) {
    StatesFile f;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# qae-states v1", 0) != 0) {
        throw std::invalid_argument("states file: missing '# qae-states v1' header");
    }
    bool have_m = false;
    std::istringstream hs(line.substr(15));
    std::string tok;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
        if (key == "num_qubits") {
            f.num_qubits = parse_index(value);
            have_m = true;
        } else if (key == "seed") {
            f.seed = std::stoull(value);
        } else if (key == "noise") {
            f.noise = value;
        }
    }
    if (!have_m || f.num_qubits == 0 || f.num_qubits > 16) {
        throw std::invalid_argument("states file: header lacks a valid num_qubits");
    }
    const std::size_t d = dim_of(f.num_qubits);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        if (trim(line).empty() || line[0] == '#') {
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != 3 + 2 * d) {
            throw std::invalid_argument("states file line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(3 + 2 * d) + " fields");
        }
        StateRecord r;
        r.role = trim(fields[0]);
        r.index = parse_index(fields[1]);
        if (!trim(fields[2]).empty()) {
            r.flips = parse_index(fields[2]);
        }
        cvec amps(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; i++) {
            amps(static_cast<Eigen::Index>(i)) = cplx(parse_real(fields[3 + 2 * i]), parse_real(fields[4 + 2 * i]));
        }
        try {
            r.state = StateVector(std::move(amps));
        } catch (const std::invalid_argument &e) {
            throw std::invalid_argument("states file line " + std::to_string(line_no) + ": " + e.what());
        }
        f.records.push_back(std::move(r));
    }
    return f;
}

/// Reassembles training pairs and labeled tests by index; unmatched records are rejected.
inline Dataset to_dataset(const StatesFile &f) {
    std::map<std::size_t, const StateRecord *> input, reference, noisy, ideal;
    for (const auto &r : f.records) {
        std::map<std::size_t, const StateRecord *> *slot = nullptr;
        if (r.role == "input") {
            slot = &input;
        } else if (r.role == "reference") {
            slot = &reference;
        } else if (r.role == "noisy") {
            slot = &noisy;
        } else if (r.role == "ideal") {
            slot = &ideal;
        } else {
            continue;
        }
        if (!slot->emplace(r.index, &r).second) {
            throw std::invalid_argument("states file: duplicate " + r.role + " index " + std::to_string(r.index));
        }
    }
    Dataset d{f.num_qubits, f.seed, f.noise, {}, {}};
    for (const auto &[i, r] : input) {
        auto it = reference.find(i);
        if (it == reference.end()) {
            throw std::invalid_argument("states file: input " + std::to_string(i) + " has no reference");
        }
        d.pairs.push_back({r->state, it->second->state});
    }
    for (const auto &[i, r] : noisy) {
        auto it = ideal.find(i);
        if (it == ideal.end()) {
            throw std::invalid_argument("states file: noisy state " + std::to_string(i) + " has no ideal state");
        }
        d.tests.push_back({r->state, it->second->state, r->flips});
    }
    return d;
}

inline void save_states(const std::string &path, const StatesFile &f) {
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path + " for writing");
    }
    write_states(out, f);
    if (!out) {
        throw std::ios_base::failure("failed writing " + path);
    }
}

inline StatesFile load_states(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open " + path);
    }
    return read_states(in);
}

}  // namespace qae

#endif
