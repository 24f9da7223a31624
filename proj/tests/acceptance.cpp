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

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "helpers.h"
#include "qae/config.h"
#include "qae/harness.h"

using namespace qae;
using namespace qae::testing;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string &what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "miss ") + what);
    }
};

std::string fmt(const char *pattern, double a, double b = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

std::size_t worker_threads() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

ExperimentConfig shipped(const std::string &name) {
    auto path = std::filesystem::path(QAE_SOURCE_DIR) / "configs" / (name + ".json");
    return load_config(path.string()).experiment;
}

std::string per_seed(const MetricsRecord &r, double SeedMetrics::*field) {
    std::ostringstream s;
    for (const auto &m : r.per_seed) {
        s << (s.tellp() ? " " : "") << format_short(m.*field);
    }
    return s.str();
}

MetricsRecord point(const std::string &config, double value) {
    ExperimentConfig c = shipped(config);
    return run_point(c, value, worker_threads());
}

Outcome criterion_1() {
    Outcome o;
    ExperimentConfig c = shipped("combined_dense");
    o.check(c.topology.widths() == std::vector<std::size_t>{4, 2, 1, 2, 4} && c.test_count() == 200 &&
                c.train.rounds == 200,
            "config is dense [4,2,1,2,4], 200 rounds, 200 tests");
    MetricsRecord r = run_point(c, 0.3, worker_threads());
    const double tests = static_cast<double>(c.test_count());
    o.check(r.f_val_bar >= 0.90, fmt("median F_val_bar = %.4f >= 0.90", r.f_val_bar) + "  per seed: " +
                                     per_seed(r, &SeedMetrics::f_val_bar));
    o.check(r.d_f_val <= 0.05, fmt("median dF_val = %.4f <= 0.05", r.d_f_val) +
                                   fmt("  (divided by sqrt(L): %.4f)", r.d_f_val / std::sqrt(tests)));
    o.check(r.f_bar <= 0.15, fmt("median pre-denoising F_bar = %.4f <= 0.15", r.f_bar));
    return o;
}

Outcome criterion_2() {
    Outcome o;
    for (const char *name : {"spinflip_dense", "spinflip_stacked"}) {
        for (double p : {0.1, 0.2, 0.3}) {
            MetricsRecord r = point(name, p);
            o.check(r.f_val_bar >= 0.95, std::string(name) + fmt(" p=%.1f: median F_val_bar = %.4f >= 0.95", p,
                                                                 r.f_val_bar));
        }
    }
    return o;
}

Outcome criterion_3() {
    Outcome o;
    MetricsRecord r = point("two_phase", 0.4);
    o.check(r.f_val_bar >= 0.90, fmt("p=0.4: median F_val_bar = %.4f >= 0.90", r.f_val_bar) + "  per seed: " +
                                     per_seed(r, &SeedMetrics::f_val_bar));
    return o;
}

Outcome criterion_4() {
    Outcome o;
    MetricsRecord clean = point("random_phase", 0.0);
    o.check(clean.f_val_bar >= 0.98, fmt("p=0: median F_val_bar = %.4f >= 0.98", clean.f_val_bar));
    MetricsRecord noisy = point("random_phase", 0.2);
    double filtered = noisy.f_val_bar_filtered.value_or(-1);
    o.check(filtered >= 0.95, fmt("p=0.2: median |J|<=1 F_val_bar = %.4f >= 0.95", filtered) +
                                  fmt("  (unfiltered %.4f)", noisy.f_val_bar));
    return o;
}

Outcome criterion_5() {
    Outcome o;
    ExperimentConfig c = shipped("spinflip_stacked_1500");
    o.check(c.stack == 2 && c.topology.widths() == std::vector<std::size_t>{4, 1, 4} && c.train.rounds == 75 &&
                c.train_phases.front().count == 1500,
            fmt("config is [4,1,4]x2, 1500 pairs, 75 rounds, learning rate %.3g", c.train.optimizer.learning_rate));
    MetricsRecord r = run_point(c, 0.4, worker_threads());
    o.check(r.f_val_bar >= 0.90, fmt("p=0.4: median F_val_bar = %.4f >= 0.90", r.f_val_bar) + "  per seed: " +
                                     per_seed(r, &SeedMetrics::f_val_bar));
    return o;
}

Outcome criterion_6() {
    Outcome o;
    for (double p : {0.1, 0.2, 0.3}) {
        MetricsRecord sparse = point("spinflip_sparse", p), dense = point("spinflip_dense", p);
        o.check(sparse.f_val_bar >= 0.95 && std::abs(sparse.f_val_bar - dense.f_val_bar) <= 0.05,
                fmt("p=%.1f: sparse median F_val_bar = %.4f", p, sparse.f_val_bar) +
                    fmt(", dense %.4f, within 0.05 and >= 0.95", dense.f_val_bar));
    }
    return o;
}

Outcome criterion_7() {
    Outcome o;
    Baseline b = analytic_baseline(0.3, 4, 200);
    o.check(std::round(b.mean * 1e4) / 1e4 == 0.2482, fmt("F_inf = %.6f rounds to 0.2482", b.mean));
    o.check(std::abs(b.standard_error - 0.03054) < 5e-6, fmt("dF_inf/sqrt(L) = %.6f", b.standard_error));
    Rng rng = make_stream(700, 0, 0);
    const std::size_t shots = 1000000;
    const StateVector g = ghz(4, 0.0);
    double sum = 0;
    for (std::size_t s = 0; s < shots; s++) {
        sum += fidelity_pure(apply_flips(g, sample_flip_subset(0.3, 4, rng)), g);
    }
    const double mean = sum / shots, se = std::sqrt(b.mean * (1 - b.mean) / shots);
    o.check(std::abs(mean - b.mean) <= 3 * se, fmt("Monte Carlo mean %.6f within 3 SE (%.6f)", mean, se));
    return o;
}

double min_eigenvalue(const cmat &m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (m + m.adjoint()));
    return es.eigenvalues().minCoeff();
}

Outcome criterion_8() {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    Rng rng = make_stream(800, 0, 0);

    bool channels_ok = true;
    Topology ae = Topology::dense({2, 1, 2});
    NetworkChannel net(ae, NetworkParams::random(ae, 1.0, rng));
    for (int i = 0; i < 20; i++) {
        DensityMatrix rho = random_density(3, rng);
        DensityMatrix small = random_density(2, rng);
        for (const cmat &out : {spinflip_channel(0.3, rho).entries(), depolarizing_channel(0.4, rho).entries(),
                                forward(net, small).entries()}) {
            channels_ok = channels_ok && std::abs(out.trace() - cplx(1.0)) < 1e-10 && min_eigenvalue(out) > -1e-10;
        }
    }
    o.check(channels_ok, "channel outputs keep unit trace and stay PSD");

    cmat choi = cmat::Zero(16, 16);
    for (std::size_t i = 0; i < 4; i++) {
        for (std::size_t j = 0; j < 4; j++) {
            auto basis = [](std::size_t k) { return StateVector::basis(2, k); };
            cmat unit = cmat::Zero(4, 4);
            unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1;
            cmat image;
            if (i == j) {
                image = forward(net, DensityMatrix(basis(i))).entries();
            } else {
                cvec plus = (basis(i).amplitudes() + basis(j).amplitudes()) / std::sqrt(2.0);
                cvec plus_i = (basis(i).amplitudes() + cplx(0, 1) * basis(j).amplitudes()) / std::sqrt(2.0);
                image = forward(net, DensityMatrix(StateVector(plus))).entries() +
                        cplx(0, 1) * forward(net, DensityMatrix(StateVector(plus_i))).entries() -
                        cplx(0.5, 0.5) * (forward(net, DensityMatrix(basis(i))).entries() +
                                          forward(net, DensityMatrix(basis(j))).entries());
            }
            choi += kron(unit, image) / 4.0;
        }
    }
    o.check(min_eigenvalue(choi) > -1e-9, fmt("Choi matrix of [2,1,2] is PSD (min eigenvalue %.2e)",
                                              min_eigenvalue(choi)));

    double pt_err = 0;
    for (int trial = 0; trial < 5; trial++) {
        DensityMatrix rho = random_density(3, rng);
        const cmat &e = rho.entries();
        cmat brute = cmat::Zero(2, 2);
        for (Eigen::Index a = 0; a < 2; a++) {
            for (Eigen::Index b = 0; b < 2; b++) {
                for (Eigen::Index t = 0; t < 4; t++) {
                    // keep qubit 1 (middle bit); qubits 0 and 2 are traced
                    Eigen::Index ta = ((t >> 1) << 2) | (a << 1) | (t & 1);
                    Eigen::Index tb = ((t >> 1) << 2) | (b << 1) | (t & 1);
                    brute(a, b) += e(ta, tb);
                }
            }
        }
        pt_err = std::max(pt_err, max_abs_diff(partial_trace(rho, {1}).entries(), brute));
    }
    o.check(pt_err < 1e-12, fmt("partial trace matches brute force (max error %.1e)", pt_err));

    double grad_err = 0;
    for (std::uint64_t i = 0; i < 10; i++) {
        Topology t = i % 2 ? Topology::dense({3, 1, 3}) : Topology::dense({2, 1, 2});
        NetworkChannel g(t, NetworkParams::random(t, 0.6, rng));
        std::vector<TrainingPair> data;
        for (int k = 0; k < 3; k++) {
            data.push_back({random_state(t.input_width(), rng), random_state(t.output_width(), rng)});
        }
        rvec diff = gradient(g, data, GradientMode::analytic) - gradient(g, data, GradientMode::finite_difference);
        grad_err = std::max(grad_err, diff.cwiseAbs().maxCoeff());
    }
    o.check(grad_err < 1e-6, fmt("analytic gradient matches finite differences (max error %.1e)", grad_err));

    const std::size_t shots = 100000;
    const StateVector g3 = ghz(3, 0.0);
    double sampled = 0;
    for (std::size_t s = 0; s < shots; s++) {
        sampled += fidelity_pure(sample_noisy_state(NoiseSpec::spin_flip(0.2), g3, rng).state, g3);
    }
    sampled /= shots;
    const double exact = fidelity_pure(spinflip_channel(0.2, DensityMatrix(g3)), g3);
    const double se = std::sqrt(exact * (1 - exact) / shots);
    o.check(std::abs(sampled - exact) <= 3 * se, fmt("sampled fidelity %.5f matches channel %.5f within 3 SE",
                                                     sampled, exact));

    std::array<double, 8> counts{};
    for (std::size_t s = 0; s < shots; s++) {
        counts[sample_flip_subset(0.5, 3, rng).mask()] += 1;
    }
    double chi2 = 0, expected = static_cast<double>(shots) / 8;
    for (double c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
    }
    const double critical = boost::math::quantile(boost::math::chi_squared(7), 0.999);
    o.check(chi2 < critical, fmt("flip subsets at p=0.5 pass chi-square (%.2f < %.2f)", chi2, critical));

    DatasetPlan plan;
    plan.num_qubits = 4;
    plan.train = {{GhzSpec(4, 0), 20}};
    plan.test = {{GhzSpec(4, kPi), 20}};
    NoiseSpec noise({SpinFlipSpec{0.2}, BrownianSpec{0.2, 20}});
    Dataset d1 = build_dataset(plan, noise, 5, 1), d3 = build_dataset(plan, noise, 5, 3);
    std::stringstream s1, s3, back;
    write_states(s1, to_states_file(d1));
    write_states(s3, to_states_file(d3));
    Dataset read = to_dataset(read_states(s1));
    write_states(back, to_states_file(read));
    std::stringstream n1, n2;
    write_network(n1, net);
    write_network(n2, read_network(n1));
    std::stringstream n1_again;
    write_network(n1_again, net);
    o.check(back.str() == s1.str() && n2.str() == n1_again.str() &&
                read_network(n1_again).params.flatten() == net.params.flatten(),
            "states and network files round-trip exactly");

    TrainConfig tc;
    tc.rounds = 5;
    tc.seed = 3;
    Topology t = Topology::dense({4, 1, 4});
    tc.threads = 1;
    TrainResult r1 = train(t, d1.pairs, tc);
    tc.threads = 3;
    TrainResult r3 = train(t, d1.pairs, tc);
    o.check(s1.str() == s3.str() && r1.costs == r3.costs && r1.network.params.flatten() == r3.network.params.flatten(),
            "datasets and training are identical for 1 and 3 threads");

    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(seconds <= 300, fmt("property checks took %.1f s (limit 300 s)", seconds));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char *title;
        std::function<Outcome()> run;
    };
    // Property checks run first; training criteria follow.
    std::vector<Criterion> criteria = {
        {8, "property suites", criterion_8},
        {7, "analytic spin-flip baseline", criterion_7},
        {1, "combined spin-flip and Brownian noise, dense [4,2,1,2,4]", criterion_1},
        {2, "spin-flip noise, dense [4,2,1,2,4] and stacked [4,1,4]x2", criterion_2},
        {3, "two-phase GHZ training, [3,1,3] at p=0.4", criterion_3},
        {4, "random-phase generalization, [3,1,3]", criterion_4},
        {5, "stacked [4,1,4]x2 with 1500 pairs at p=0.4", criterion_5},
        {6, "sparse [4,2,1,2,4] against dense", criterion_6},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, seconds);
        for (const auto &d : o.details) {
            std::printf("    %s\n", d.c_str());
        }
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
