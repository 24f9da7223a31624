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

#ifndef QAE_HARNESS_H
#define QAE_HARNESS_H

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qae/dataset.h"
#include "qae/noise.h"
#include "qae/parallel.h"
#include "qae/qnn.h"
#include "qae/train.h"

namespace qae {

struct PhaseCount {
    double phase = 0;
    std::size_t count = 0;
};

enum class TestRule { fixed, random_open_interval };

/// One experiment of the denoising study: which network, which GHZ targets, which noise,
/// how long to train and on how many seeds.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string topology_kind = "dense";
    Topology topology = Topology::dense({4, 2, 1, 2, 4});
    std::size_t stack = 1;

    std::size_t num_qubits = 4;
    std::vector<PhaseCount> train_phases{{0, 200}};
    TestRule test_rule = TestRule::fixed;
    std::vector<PhaseCount> test_phases{{0, 200}};
    std::size_t random_test_count = 0;
    double random_test_low = 0;
    double random_test_high = std::numbers::pi;

    NoiseSpec noise = NoiseSpec::spin_flip(0.2);
    std::size_t sweep_stage = 0;
    std::vector<double> sweep_values;

    TrainConfig train;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::size_t filter_max_flips = 1;

    void validate() const {
        if (topology.input_width() != num_qubits || topology.output_width() != num_qubits) {
            throw std::invalid_argument("topology input/output width must equal the target qubit count");
        }
        if (stack < 1) {
            throw std::invalid_argument("stack must be at least 1");
        }
        if (stack > 1 && !topology.is_square()) {
            throw std::invalid_argument("stacking needs equal input and output widths");
        }
        if (train_phases.empty()) {
            throw std::invalid_argument("at least one training phase is required");
        }
        auto check_phase = [](double phi) {
            if (!(phi >= 0 && phi < 2 * std::numbers::pi)) {
                throw std::invalid_argument("phases must lie in [0, 2 pi)");
            }
        };
        for (const auto &pc : train_phases) {
            check_phase(pc.phase);
            if (pc.count < 1) {
                throw std::invalid_argument("pair counts must be at least 1");
            }
        }
        if (test_rule == TestRule::fixed) {
            if (test_phases.empty()) {
                throw std::invalid_argument("at least one test phase is required");
            }
            for (const auto &pc : test_phases) {
                check_phase(pc.phase);
                if (pc.count < 1) {
                    throw std::invalid_argument("test counts must be at least 1");
                }
            }
        } else if (random_test_count < 1 || !(random_test_low < random_test_high)) {
            throw std::invalid_argument("random-phase tests need a count >= 1 and low < high");
        }
        if (sweep_stage >= noise.stages.size()) {
            throw std::invalid_argument("sweep stage index outside the noise stages");
        }
        if (train.rounds < 1) {
            throw std::invalid_argument("rounds must be at least 1");
        }
        if (seeds.empty()) {
            throw std::invalid_argument("at least one seed is required");
        }
        noise.validate_all();
    }

    NoiseSpec noise_at(double value) const {
        NoiseSpec n = noise;
        set_stage_value(n.stages.at(sweep_stage), value);
        n.validate_all();
        return n;
    }

    /// The configured value of the swept stage, used when no sweep grid is given.
    double default_noise_value() const {
        return stage_value(noise.stages.at(sweep_stage));
    }

    std::vector<double> grid() const {
        return sweep_values.empty() ? std::vector<double>{default_noise_value()} : sweep_values;
    }

    DatasetPlan plan() const {
        DatasetPlan p;
        p.num_qubits = num_qubits;
        for (const auto &pc : train_phases) {
            p.train.push_back({GhzSpec(num_qubits, pc.phase), pc.count});
        }
        if (test_rule == TestRule::fixed) {
            for (const auto &pc : test_phases) {
                p.test.push_back({GhzSpec(num_qubits, pc.phase), pc.count});
            }
        } else {
            p.random_test = RandomPhaseTests{random_test_count, random_test_low, random_test_high};
        }
        return p;
    }

    /// All train and test phases are multiples of pi.
    bool phases_in_pi_z() const {
        auto in_pi_z = [](double phi) {
            double r = std::remainder(phi, std::numbers::pi);
            return std::abs(r) < 1e-12;
        };
        if (test_rule != TestRule::fixed) {
            return false;
        }
        for (const auto &pc : train_phases) {
            if (!in_pi_z(pc.phase)) {
                return false;
            }
        }
        for (const auto &pc : test_phases) {
            if (!in_pi_z(pc.phase)) {
                return false;
            }
        }
        return true;
    }

    std::size_t test_count() const {
        if (test_rule == TestRule::random_open_interval) {
            return random_test_count;
        }
        std::size_t n = 0;
        for (const auto &pc : test_phases) {
            n += pc.count;
        }
        return n;
    }
};

struct Baseline {
    double mean = 1;          // expected input fidelity (1-p)^m + p^m
    double standard_error = 0;  // sqrt(mean (1 - mean) / L)
};

/// Expected fidelity of spin-flipped GHZ states with phase in pi Z, and the spread of an L-sample mean.
inline Baseline analytic_baseline(double p, std::size_t m, std::size_t num_samples,
                                  std::span<const double> phases = {}) {
    validate(SpinFlipSpec{p});
    if (num_samples < 1) {
        throw std::invalid_argument("baseline needs at least one sample");
    }
    for (double phi : phases) {
        if (std::abs(std::remainder(phi, std::numbers::pi)) > 1e-12) {
            throw std::invalid_argument("the closed-form baseline only holds for phases in pi Z");
        }
    }
    Baseline b;
    b.mean = std::pow(1 - p, static_cast<double>(m)) + std::pow(p, static_cast<double>(m));
    b.standard_error = std::sqrt(b.mean * (1 - b.mean) / static_cast<double>(num_samples));
    return b;
}

/// Test states with at most `max_flips` flipped qubits. Throws when a state carries no flip label.
inline std::vector<LabeledTestState> filter_by_flip_count(std::span<const LabeledTestState> tests,
                                                          std::size_t max_flips) {
    std::vector<LabeledTestState> out;
    for (const auto &t : tests) {
        if (!t.flip_count) {
            throw std::invalid_argument("test states carry no flip-count labels");
        }
        if (*t.flip_count <= max_flips) {
            out.push_back(t);
        }
    }
    return out;
}

struct SeedMetrics {
    std::uint64_t seed = 0;
    double f_bar = 0;
    double d_f = 0;
    double f_val_bar = 0;
    double d_f_val = 0;
    std::optional<double> f_bar_filtered;
    std::optional<double> f_val_bar_filtered;
    std::optional<std::size_t> n_tests_filtered;
    std::vector<double> costs;
    NetworkChannel network;
    ValidationReport report;
};

struct MetricsRecord {
    std::string noise_kind;
    std::string noise_label;   // value column of the CSV, e.g. "0.2" or "0.2+0.3"
    double noise_value = 0;    // value of the swept stage
    std::optional<double> f_inf;
    std::optional<double> d_f_inf;
    std::vector<SeedMetrics> per_seed;

    // Medians across seeds.
    double f_bar = 0;
    double d_f = 0;
    double f_val_bar = 0;
    double d_f_val = 0;
    std::optional<double> f_bar_filtered;
    std::optional<double> f_val_bar_filtered;
    std::optional<double> n_tests_filtered;
};

inline double median(std::vector<double> v) {
    if (v.empty()) {
        throw std::invalid_argument("median of an empty list");
    }
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Dataset seed for one (seed, noise point): topologies sharing a seed see the same data.
inline std::uint64_t dataset_seed(std::uint64_t seed, double noise_value) {
    return derive_seed(seed, stream::kDataset, std::bit_cast<std::uint64_t>(noise_value));
}

inline SeedMetrics run_seed(const ExperimentConfig &config, const NoiseSpec &noise, std::uint64_t seed,
                            double noise_value, std::size_t threads) {
    Dataset data = build_dataset(config.plan(), noise, dataset_seed(seed, noise_value), threads);
    TrainConfig tc = config.train;
    tc.seed = seed;
    tc.threads = threads;
    TrainResult trained = train(config.topology, data.pairs, tc);

    SeedMetrics m;
    m.seed = seed;
    m.report = validation(trained.network, data.tests, config.stack, threads);
    m.f_bar = m.report.mean_in;
    m.d_f = m.report.spread_in;
    m.f_val_bar = m.report.mean_val;
    m.d_f_val = m.report.spread_val;
    if (noise.has_spin_flip()) {
        auto subset = filter_by_flip_count(data.tests, config.filter_max_flips);
        m.n_tests_filtered = subset.size();
        if (!subset.empty()) {
            auto sub = validation(trained.network, subset, config.stack, threads);
            m.f_bar_filtered = sub.mean_in;
            m.f_val_bar_filtered = sub.mean_val;
        }
    }
    m.costs = std::move(trained.costs);
    m.network = std::move(trained.network);
    return m;
}

inline std::optional<double> median_of(const std::vector<SeedMetrics> &seeds,
                                       std::optional<double> SeedMetrics::*field) {
    std::vector<double> v;
    for (const auto &s : seeds) {
        if (s.*field) {
            v.push_back(*(s.*field));
        }
    }
    if (v.empty()) {
        return std::nullopt;
    }
    return median(std::move(v));
}

/// Builds fresh datasets, trains and validates once per seed, and summarizes with medians.
/// Seeds run concurrently on up to `threads` threads; results do not depend on the thread count.
inline MetricsRecord run_point(const ExperimentConfig &config, double noise_value, std::size_t threads = 1) {
    config.validate();
    NoiseSpec noise = config.noise_at(noise_value);

    MetricsRecord rec;
    rec.noise_value = noise_value;
    for (std::size_t i = 0; i < noise.stages.size(); i++) {
        rec.noise_kind += (i ? "+" : "") + stage_kind(noise.stages[i]);
        rec.noise_label += (i ? "+" : "") + format_short(stage_value(noise.stages[i]));
    }
    if (noise.is_pure_spin_flip() && config.phases_in_pi_z()) {
        Baseline b = analytic_baseline(std::get<SpinFlipSpec>(noise.stages[0]).p, config.num_qubits, config.test_count());
        rec.f_inf = b.mean;
        rec.d_f_inf = b.standard_error;
    }

    const std::size_t n = config.seeds.size();
    rec.per_seed.resize(n);
    const std::size_t outer = std::min(threads, n);
    const std::size_t inner = std::max<std::size_t>(1, threads / std::max<std::size_t>(outer, 1));
    parallel_for(n, outer, [&](std::size_t i) {
        rec.per_seed[i] = run_seed(config, noise, config.seeds[i], noise_value, inner);
    });

    auto med = [&](double SeedMetrics::*field) {
        std::vector<double> v;
        for (const auto &s : rec.per_seed) {
            v.push_back(s.*field);
        }
        return median(std::move(v));
    };
    rec.f_bar = med(&SeedMetrics::f_bar);
    rec.d_f = med(&SeedMetrics::d_f);
    rec.f_val_bar = med(&SeedMetrics::f_val_bar);
    rec.d_f_val = med(&SeedMetrics::d_f_val);
    rec.f_bar_filtered = median_of(rec.per_seed, &SeedMetrics::f_bar_filtered);
    rec.f_val_bar_filtered = median_of(rec.per_seed, &SeedMetrics::f_val_bar_filtered);
    std::vector<double> counts;
    for (const auto &s : rec.per_seed) {
        if (s.n_tests_filtered) {
            counts.push_back(static_cast<double>(*s.n_tests_filtered));
        }
    }
    if (!counts.empty()) {
        rec.n_tests_filtered = median(std::move(counts));
    }
    return rec;
}

/// One record per grid value, in grid order, each from fresh datasets.
inline std::vector<MetricsRecord> run_sweep(const ExperimentConfig &config, const std::vector<double> &grid,
                                            std::size_t threads = 1) {
    if (grid.empty()) {
        throw std::invalid_argument("noise grid is empty");
    }
    std::vector<MetricsRecord> out;
    out.reserve(grid.size());
    for (double v : grid) {
        out.push_back(run_point(config, v, threads));
    }
    return out;
}

inline constexpr const char *kMetricsHeader =
    "noise_kind,noise_value,seed,F_bar,dF,F_val_bar,dF_val,F_inf,dF_inf,F_val_bar_Jle1,n_tests_Jle1";

inline std::string csv_cell(std::optional<double> v) {
    return v ? format_double(*v) : std::string();
}

/// One row per seed.
inline void write_metrics_csv(std::ostream &out, const std::vector<MetricsRecord> &records) {
    out << kMetricsHeader << '\n';
    for (const auto &r : records) {
        for (const auto &s : r.per_seed) {
            out << r.noise_kind << ',' << r.noise_label << ',' << s.seed << ',' << format_double(s.f_bar) << ','
                << format_double(s.d_f) << ',' << format_double(s.f_val_bar) << ',' << format_double(s.d_f_val) << ','
                << csv_cell(r.f_inf) << ',' << csv_cell(r.d_f_inf) << ',' << csv_cell(s.f_val_bar_filtered) << ','
                << (s.n_tests_filtered ? std::to_string(*s.n_tests_filtered) : std::string()) << '\n';
        }
    }
}

/// Same columns, one row per record holding the medians, with seed "median".
inline void write_summary_csv(std::ostream &out, const std::vector<MetricsRecord> &records) {
    out << kMetricsHeader << '\n';
    for (const auto &r : records) {
        out << r.noise_kind << ',' << r.noise_label << ",median," << format_double(r.f_bar) << ','
            << format_double(r.d_f) << ',' << format_double(r.f_val_bar) << ',' << format_double(r.d_f_val) << ','
            << csv_cell(r.f_inf) << ',' << csv_cell(r.d_f_inf) << ',' << csv_cell(r.f_val_bar_filtered) << ','
            << csv_cell(r.n_tests_filtered) << '\n';
    }
}

}  // namespace qae

#endif
