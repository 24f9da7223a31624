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

#ifndef QAE_TRAIN_H
#define QAE_TRAIN_H

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qae/linops.h"
#include "qae/parallel.h"
#include "qae/qnn.h"
#include "qae/rng.h"
#include "qae/states.h"

namespace qae {

struct CostReport {
    double cost = 1;
    double mean_fidelity = 0;
    std::vector<double> per_sample_fidelities;
};

/// Mean of `values`, summed in index order.
inline double ordered_mean(std::span<const double> values) {
    double s = 0;
    for (double v : values) {
        s += v;
    }
    return s / static_cast<double>(values.size());
}

/// sqrt(sum_i (F_i - mean)^2), deliberately not divided by the sample count.
inline double spread(std::span<const double> values, double mean) {
    double s = 0;
    for (double v : values) {
        s += (v - mean) * (v - mean);
    }
    return std::sqrt(s);
}

inline CostReport make_cost_report(std::vector<double> fidelities) {
    CostReport r;
    r.mean_fidelity = ordered_mean(fidelities);
    r.cost = 1 - r.mean_fidelity;
    r.per_sample_fidelities = std::move(fidelities);
    return r;
}

inline void check_pairs(const NetworkChannel &net, std::span<const TrainingPair> data) {
    if (data.empty()) {
        throw std::invalid_argument("training data is empty");
    }
    for (const auto &pair : data) {
        if (pair.input.num_qubits() != net.topology.input_width() ||
            pair.reference.num_qubits() != net.topology.output_width()) {
            throw std::invalid_argument("training pair width does not match the network");
        }
    }
}

inline CostReport cost(const NetworkChannel &net, std::span<const TrainingPair> data, std::size_t threads = 1) {
    check_pairs(net, data);
    CompiledNetwork compiled(net);
    std::vector<double> f(data.size());
    parallel_for(data.size(), threads, [&](std::size_t i) {
        f[i] = stacked_fidelity(compiled, data[i].input.amplitudes(), 1, data[i].reference.amplitudes());
    });
    return make_cost_report(std::move(f));
}

struct ValidationReport {
    double mean_val = 0;    // mean fidelity of the network outputs with the ideal states
    double spread_val = 0;
    std::vector<double> per_sample_val;
    double mean_in = 0;     // same statistics for the noisy inputs before denoising
    double spread_in = 0;
    std::vector<double> per_sample_in;
};

inline ValidationReport make_validation_report(std::vector<double> val, std::vector<double> in) {
    ValidationReport r;
    r.mean_val = ordered_mean(val);
    r.spread_val = spread(val, r.mean_val);
    r.mean_in = ordered_mean(in);
    r.spread_in = spread(in, r.mean_in);
    r.per_sample_val = std::move(val);
    r.per_sample_in = std::move(in);
    return r;
}

/// Fidelities with the ideal states before and after applying the network `stack_times` times.
inline ValidationReport validation(const NetworkChannel &net, std::span<const LabeledTestState> tests,
                                   std::size_t stack_times = 1, std::size_t threads = 1) {
    if (tests.empty()) {
        throw std::invalid_argument("test set is empty");
    }
    if (stack_times < 1) {
        throw std::invalid_argument("stack count must be at least 1");
    }
    if (stack_times > 1 && !net.topology.is_square()) {
        throw std::invalid_argument("only networks with equal input and output widths can be stacked");
    }
    for (const auto &t : tests) {
        if (t.noisy.num_qubits() != net.topology.input_width() || t.ideal.num_qubits() != net.topology.output_width()) {
            throw std::invalid_argument("test state width does not match the network");
        }
    }
    CompiledNetwork compiled(net);
    std::vector<double> val(tests.size()), in(tests.size());
    parallel_for(tests.size(), threads, [&](std::size_t i) {
        val[i] = stacked_fidelity(compiled, tests[i].noisy.amplitudes(), stack_times, tests[i].ideal.amplitudes());
        in[i] = fidelity_pure(tests[i].noisy, tests[i].ideal);
    });
    return make_validation_report(std::move(val), std::move(in));
}

/// Fidelity of one pair and, per neuron, the local matrix G with dF/dtheta_a = 2 Re tr(dU/dtheta_a G).
struct SampleGradient {
    double fidelity = 0;
    std::vector<std::vector<cmat>> local;
};

inline SampleGradient sample_gradient(const CompiledNetwork &net, const cvec &input, const cvec &reference) {
    const std::size_t num_layers = net.layers.size();
    // states[l][j]: register factor of layer l before neuron j; states[l][w] after the last neuron.
    std::vector<std::vector<cmat>> states(num_layers);
    cmat factor = input;
    for (std::size_t l = 0; l < num_layers; l++) {
        const auto &layer = net.layers[l];
        auto &st = states[l];
        st.reserve(layer.neurons.size() + 1);
        st.push_back(attach_fresh_qubits(compress_factor(factor), layer.width));
        for (const auto &neuron : layer.neurons) {
            cmat next = st.back();
            apply_on_qubits(next, neuron.exp.unitary, neuron.selection);
            st.push_back(std::move(next));
        }
        factor = trace_out_leading(st.back(), layer.prev_width, layer.width);
    }

    SampleGradient out;
    out.fidelity = std::clamp((factor.adjoint() * reference).squaredNorm(), 0.0, 1.0);
    out.local.resize(num_layers);

    // Observable pulled back to the output of the current layer; starts at |ref><ref|.
    cmat sigma = reference * reference.adjoint();
    for (std::size_t l = num_layers; l-- > 0;) {
        const auto &layer = net.layers[l];
        const auto &st = states[l];
        auto &local = out.local[l];
        local.resize(layer.neurons.size());
        cmat y = st.back();
        apply_on_qubits(y, sigma, layer.output_qubits);
        for (std::size_t j = layer.neurons.size(); j-- > 0;) {
            const auto &neuron = layer.neurons[j];
            local[j] = local_outer_trace(st[j], y, neuron.selection);
            apply_on_qubits(y, neuron.unitary_adjoint, neuron.selection);
        }
        if (l > 0) {
            // sigma_prev = <down|U^dagger (Id (x) sigma) U|down> on the previous layer.
            const auto prev = static_cast<Eigen::Index>(dim_of(layer.prev_width));
            cmat phi = attach_fresh_qubits(cmat::Identity(prev, prev), layer.width);
            for (const auto &neuron : layer.neurons) {
                apply_on_qubits(phi, neuron.exp.unitary, neuron.selection);
            }
            cmat s_phi = phi;
            apply_on_qubits(s_phi, sigma, layer.output_qubits);
            sigma = phi.adjoint() * s_phi;
        }
    }
    return out;
}

enum class GradientMode { analytic, finite_difference };

inline constexpr double kFiniteDifferenceStep = 1e-5;

struct CostAndGradient {
    CostReport report;
    rvec gradient;
};

inline CostAndGradient analytic_cost_and_gradient(const NetworkChannel &net, std::span<const TrainingPair> data,
                                                  std::size_t threads = 1) {
    check_pairs(net, data);
    CompiledNetwork compiled(net);
    std::vector<SampleGradient> per_sample(data.size());
    parallel_for(data.size(), threads, [&](std::size_t i) {
        per_sample[i] = sample_gradient(compiled, data[i].input.amplitudes(), data[i].reference.amplitudes());
    });

    std::vector<double> fidelities(data.size());
    std::vector<std::vector<cmat>> total = per_sample[0].local;
    for (auto &layer : total) {
        for (auto &g : layer) {
            g.setZero();
        }
    }
    for (std::size_t i = 0; i < data.size(); i++) {
        fidelities[i] = per_sample[i].fidelity;
        for (std::size_t l = 0; l < total.size(); l++) {
            for (std::size_t j = 0; j < total[l].size(); j++) {
                total[l][j] += per_sample[i].local[l][j];
            }
        }
    }

    CostAndGradient out;
    out.gradient.resize(static_cast<Eigen::Index>(net.params.size()));
    const double scale = -2.0 / static_cast<double>(data.size());
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l < total.size(); l++) {
        for (std::size_t j = 0; j < total[l].size(); j++) {
            cvec traces = compiled.layers[l].neurons[j].exp.pullback(total[l][j]);
            out.gradient.segment(offset, traces.size()) = scale * traces.real();
            offset += traces.size();
        }
    }
    out.report = make_cost_report(std::move(fidelities));
    return out;
}

/// Central differences with step 1e-5 on every coefficient.
inline rvec finite_difference_gradient(const NetworkChannel &net, std::span<const TrainingPair> data,
                                       std::size_t threads = 1, double step = kFiniteDifferenceStep) {
    check_pairs(net, data);
    const rvec theta = net.params.flatten();
    rvec grad(theta.size());
    auto cost_at = [&](const rvec &t) {
        return cost(NetworkChannel(net.topology, net.params.with_flat(t)), data, threads).cost;
    };
    for (Eigen::Index i = 0; i < theta.size(); i++) {
        rvec plus = theta, minus = theta;
        plus(i) += step;
        minus(i) -= step;
        grad(i) = (cost_at(plus) - cost_at(minus)) / (2 * step);
    }
    return grad;
}

inline rvec gradient(const NetworkChannel &net, std::span<const TrainingPair> data,
                     GradientMode mode = GradientMode::analytic, std::size_t threads = 1) {
    if (mode == GradientMode::finite_difference) {
        return finite_difference_gradient(net, data, threads);
    }
    return analytic_cost_and_gradient(net, data, threads).gradient;
}

struct NadamHyper {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    std::size_t step = 0;
    rvec first_moment;
    rvec second_moment;
    NadamHyper hyper;

    static OptimizerState zeros(std::size_t n, NadamHyper hyper = {}) {
        return OptimizerState{0, rvec::Zero(static_cast<Eigen::Index>(n)), rvec::Zero(static_cast<Eigen::Index>(n)),
                              hyper};
    }
};

/// Nesterov-accelerated adaptive moment step.
inline std::pair<OptimizerState, rvec> nadam_step(const OptimizerState &state, const rvec &params, const rvec &grad) {
    if (params.size() != grad.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw std::invalid_argument("nadam_step: length mismatch");
    }
    const auto &h = state.hyper;
    OptimizerState next = state;
    next.step = state.step + 1;
    const double t = static_cast<double>(next.step);
    const double bias1 = 1 - std::pow(h.beta1, t);
    const double bias2 = 1 - std::pow(h.beta2, t);
    next.first_moment = h.beta1 * state.first_moment + (1 - h.beta1) * grad;
    next.second_moment = h.beta2 * state.second_moment + (1 - h.beta2) * grad.cwiseAbs2();
    rvec m_hat = next.first_moment / bias1;
    rvec v_hat = next.second_moment / bias2;
    rvec numer = h.beta1 * m_hat + ((1 - h.beta1) / bias1) * grad;
    rvec denom = v_hat.cwiseSqrt().array() + h.epsilon;
    rvec updated = params - h.learning_rate * numer.cwiseQuotient(denom);
    return {std::move(next), std::move(updated)};
}

struct TrainConfig {
    std::size_t rounds = 200;
    std::uint64_t seed = 1;
    double init_scale = 0.5;
    NadamHyper optimizer;
    GradientMode mode = GradientMode::analytic;
    std::size_t threads = 1;
};

struct TrainResult {
    NetworkChannel network;
    std::vector<double> costs;  // cost at the parameters each round started from
};

inline NetworkParams initial_params(const Topology &topology, const TrainConfig &config) {
    Rng rng = make_stream(config.seed, stream::kInit);
    return NetworkParams::random(topology, config.init_scale, rng);
}

/// Full-batch Nadam from `start`.
inline TrainResult train_from(NetworkChannel start, std::span<const TrainingPair> data, const TrainConfig &config) {
    if (config.rounds < 1) {
        throw std::invalid_argument("training needs at least one round");
    }
    check_pairs(start, data);
    TrainResult result{std::move(start), {}};
    result.costs.reserve(config.rounds);
    rvec theta = result.network.params.flatten();
    OptimizerState opt = OptimizerState::zeros(static_cast<std::size_t>(theta.size()), config.optimizer);
    for (std::size_t r = 0; r < config.rounds; r++) {
        rvec grad;
        double c;
        if (config.mode == GradientMode::analytic) {
            auto cg = analytic_cost_and_gradient(result.network, data, config.threads);
            grad = std::move(cg.gradient);
            c = cg.report.cost;
        } else {
            c = cost(result.network, data, config.threads).cost;
            grad = finite_difference_gradient(result.network, data, config.threads);
        }
        result.costs.push_back(c);
        auto [next_opt, next_theta] = nadam_step(opt, theta, grad);
        opt = std::move(next_opt);
        theta = std::move(next_theta);
        result.network.params = result.network.params.with_flat(theta);
    }
    return result;
}

inline TrainResult train(const Topology &topology, std::span<const TrainingPair> data, const TrainConfig &config) {
    if (data.empty()) {
        throw std::invalid_argument("training data is empty");
    }
    if (data[0].input.num_qubits() != topology.input_width()) {
        throw std::invalid_argument("training data width does not match the topology");
    }
    return train_from(NetworkChannel(topology, initial_params(topology, config)), data, config);
}

}  // namespace qae

#endif
