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

#include <numbers>
#include <sstream>

#include "gtest/gtest.h"
#include "helpers.h"
#include "qae/harness.h"

using namespace qae;
using namespace qae::testing;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.name = "tiny";
    c.topology = Topology::dense({2, 1, 2});
    c.num_qubits = 2;
    c.train_phases = {{0, 12}};
    c.test_phases = {{0, 10}};
    c.noise = NoiseSpec::spin_flip(0.1);
    c.train.rounds = 6;
    c.seeds = {1, 2};
    return c;
}

std::string metrics_text(const std::vector<MetricsRecord> &records) {
    std::stringstream s;
    write_metrics_csv(s, records);
    write_summary_csv(s, records);
    return s.str();
}

}  // namespace

TEST(analytic_baseline, noiseless) {
    Baseline b = analytic_baseline(0, 4, 200);
    EXPECT_EQ(b.mean, 1.0);
    EXPECT_EQ(b.standard_error, 0.0);
}

TEST(analytic_baseline, four_qubits_at_p_0_3) {
    Baseline b = analytic_baseline(0.3, 4, 200);
    EXPECT_NEAR(b.mean, 0.2482, 5e-5);
    EXPECT_NEAR(b.standard_error, std::sqrt(0.2482 * 0.7518 / 200), 5e-5);
    EXPECT_NEAR(b.standard_error, 0.03054, 5e-5);
}

TEST(analytic_baseline, monte_carlo_over_subsets) {
    Rng rng = make_stream(100, 0, 0);
    const std::size_t shots = 1000000;
    StateVector g = ghz(4, 0.0);
    double sum = 0;
    for (std::size_t s = 0; s < shots; s++) {
        sum += fidelity_pure(apply_flips(g, sample_flip_subset(0.3, 4, rng)), g);
    }
    const double mean = sum / shots, expected = analytic_baseline(0.3, 4, 1).mean;
    EXPECT_NEAR(mean, expected, 3 * std::sqrt(expected * (1 - expected) / shots));
}

TEST(analytic_baseline, requires_pi_z_phases) {
    std::vector<double> ok = {0, kPi}, bad = {0, kPi / 3};
    EXPECT_NO_THROW(analytic_baseline(0.2, 3, 10, ok));
    EXPECT_THROW(analytic_baseline(0.2, 3, 10, bad), std::invalid_argument);
    EXPECT_THROW(analytic_baseline(0.6, 3, 10), std::invalid_argument);
}

TEST(filter_by_flip_count, full_and_empty_filters) {
    DatasetPlan p;
    p.num_qubits = 3;
    p.test = {{GhzSpec(3, kPi), 300}};
    Dataset d = build_dataset(p, NoiseSpec::spin_flip(0.3), 4);
    EXPECT_EQ(filter_by_flip_count(d.tests, 3).size(), d.tests.size());
    auto clean = filter_by_flip_count(d.tests, 0);
    EXPECT_GT(clean.size(), 0u);
    for (const auto &t : clean) {
        EXPECT_NEAR(fidelity_pure(t.noisy, t.ideal), 1.0, 1e-15);
    }
}

TEST(filter_by_flip_count, binomial_fraction) {
    DatasetPlan p;
    p.num_qubits = 3;
    p.test = {{GhzSpec(3, 0), 10000}};
    Dataset d = build_dataset(p, NoiseSpec::spin_flip(0.2), 6);
    const double expected = std::pow(0.8, 3) + 3 * 0.2 * 0.8 * 0.8;
    EXPECT_NEAR(expected, 0.896, 1e-12);
    const double frac = static_cast<double>(filter_by_flip_count(d.tests, 1).size()) / 10000;
    EXPECT_NEAR(frac, expected, 3 * std::sqrt(expected * (1 - expected) / 10000));
}

TEST(filter_by_flip_count, requires_labels) {
    DatasetPlan p;
    p.num_qubits = 2;
    p.test = {{GhzSpec(2, 0), 3}};
    Dataset d = build_dataset(p, NoiseSpec::brownian(0.1), 6);
    EXPECT_THROW(filter_by_flip_count(d.tests, 1), std::invalid_argument);
}

TEST(experiment_config, validation) {
    ExperimentConfig c = tiny_config();
    EXPECT_NO_THROW(c.validate());
    c.num_qubits = 3;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_config();
    c.train_phases = {{7.0, 3}};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_config();
    c.test_phases = {{0, 0}};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_config();
    c.topology = Topology::dense({2, 1});
    c.stack = 2;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_config();
    c.sweep_stage = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(run_point, noiseless_input_fidelity_is_one) {
    ExperimentConfig c = tiny_config();
    MetricsRecord r = run_point(c, 0.0);
    EXPECT_EQ(r.f_bar, 1.0);
    EXPECT_EQ(r.f_inf, std::optional<double>(1.0));
    for (const auto &s : r.per_seed) {
        EXPECT_EQ(s.f_bar, 1.0);
    }
}

TEST(run_point, two_seeds_give_two_entries_and_median) {
    ExperimentConfig c = tiny_config();
    MetricsRecord r = run_point(c, 0.2);
    ASSERT_EQ(r.per_seed.size(), 2u);
    EXPECT_EQ(r.per_seed[0].seed, 1u);
    EXPECT_EQ(r.per_seed[1].seed, 2u);
    EXPECT_NEAR(r.f_val_bar, 0.5 * (r.per_seed[0].f_val_bar + r.per_seed[1].f_val_bar), 1e-15);
    EXPECT_EQ(r.noise_kind, "spin_flip");
    EXPECT_EQ(r.noise_value, 0.2);
    for (const auto &s : r.per_seed) {
        EXPECT_EQ(s.costs.size(), c.train.rounds);
        EXPECT_LT(std::abs(s.f_bar - ordered_mean(s.report.per_sample_in)), 1e-12);
        EXPECT_LT(std::abs(s.f_val_bar - ordered_mean(s.report.per_sample_val)), 1e-12);
        EXPECT_EQ(s.d_f_val, spread(s.report.per_sample_val, s.report.mean_val));
        EXPECT_GE(s.f_val_bar, 0.0);
        EXPECT_LE(s.f_val_bar, 1.0);
        ASSERT_TRUE(s.n_tests_filtered.has_value());
    }
}

TEST(run_point, stacked_validation_applies_network_twice) {
    ExperimentConfig c = tiny_config();
    c.stack = 2;
    c.seeds = {3};
    MetricsRecord r = run_point(c, 0.1);
    const SeedMetrics &s = r.per_seed[0];
    Dataset d = build_dataset(c.plan(), c.noise_at(0.1), dataset_seed(3, 0.1));
    EXPECT_EQ(validation(s.network, d.tests, 2).mean_val, s.f_val_bar);
    EXPECT_NE(validation(s.network, d.tests, 1).mean_val, s.f_val_bar);
}

TEST(run_point, baseline_only_for_pure_spin_flip_in_pi_z) {
    ExperimentConfig c = tiny_config();
    c.seeds = {1};
    c.noise = NoiseSpec({SpinFlipSpec{0.1}, BrownianSpec{0.1, 5}});
    MetricsRecord r = run_point(c, 0.1);
    EXPECT_FALSE(r.f_inf.has_value());
    EXPECT_EQ(r.noise_kind, "spin_flip+brownian");
    EXPECT_EQ(r.noise_label, "0.1+0.1");
    c = tiny_config();
    c.seeds = {1};
    c.test_phases = {{kPi / 2, 4}};
    EXPECT_FALSE(run_point(c, 0.1).f_inf.has_value());
}

TEST(run_sweep, grid_order_and_baselines) {
    ExperimentConfig c = tiny_config();
    c.seeds = {1};
    c.train.rounds = 2;
    std::vector<double> grid = {0, 0.1, 0.2, 0.3};
    auto records = run_sweep(c, grid);
    ASSERT_EQ(records.size(), 4u);
    for (std::size_t i = 0; i < 4; i++) {
        EXPECT_EQ(records[i].noise_value, grid[i]);
        if (i) {
            EXPECT_LT(*records[i].f_inf, *records[i - 1].f_inf);
        }
    }
    EXPECT_EQ(run_sweep(c, {0.1}).size(), 1u);
    EXPECT_THROW(run_sweep(c, {}), std::invalid_argument);
}

TEST(run_sweep, thread_count_does_not_change_results) {
    ExperimentConfig c = tiny_config();
    c.seeds = {1, 2, 3};
    std::vector<double> grid = {0.1, 0.25};
    EXPECT_EQ(metrics_text(run_sweep(c, grid, 1)), metrics_text(run_sweep(c, grid, 4)));
}

TEST(metrics_csv, header_and_empty_cells) {
    ExperimentConfig c = tiny_config();
    c.seeds = {1};
    c.noise = NoiseSpec::brownian(0.1, 4);
    std::stringstream s;
    write_metrics_csv(s, {run_point(c, 0.1)});
    std::string header, row;
    std::getline(s, header);
    std::getline(s, row);
    EXPECT_EQ(header, "noise_kind,noise_value,seed,F_bar,dF,F_val_bar,dF_val,F_inf,dF_inf,F_val_bar_Jle1,n_tests_Jle1");
    EXPECT_EQ(row.substr(0, 15), "brownian,0.1,1,");
    EXPECT_EQ(row.substr(row.size() - 4), ",,,,");
}
