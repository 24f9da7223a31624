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

#ifndef QAE_QNN_H
#define QAE_QNN_H

#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qae/linops.h"
#include "qae/rng.h"

namespace qae {

/// Layer widths plus, for every neuron of every non-input layer, the ordered list of
/// previous-layer qubits it acts on. connections[k][j] belongs to neuron j of layer k + 2.
class Topology {
   public:
    using Connections = std::vector<std::vector<std::vector<std::size_t>>>;

    Topology() = default;

    Topology(std::vector<std::size_t> widths, Connections connections)
        : widths_(std::move(widths)), connections_(std::move(connections)) {
        validate();
    }

    /// Every neuron connects to all qubits of the previous layer.
    static Topology dense(std::vector<std::size_t> widths) {
        Connections conn;
        for (std::size_t k = 1; k < widths.size(); k++) {
            std::vector<std::size_t> all(widths[k - 1]);
            std::iota(all.begin(), all.end(), 0);
            conn.emplace_back(widths[k], all);
        }
        return Topology(std::move(widths), std::move(conn));
    }

    /// Sparse [4,2,1,2,4] whose neurons only touch adjacent qubits of the previous layer.
    static Topology sparse_4_2_1_2_4() {
        return Topology({4, 2, 1, 2, 4}, {
                                             {{0, 1}, {2, 3}},
                                             {{0, 1}},
                                             {{0}, {0}},
                                             {{0}, {0}, {1}, {1}},
                                         });
    }

    const std::vector<std::size_t> &widths() const {
        return widths_;
    }
    const Connections &connections() const {
        return connections_;
    }
    std::size_t num_layers() const {
        return widths_.size();
    }
    std::size_t input_width() const {
        return widths_.front();
    }
    std::size_t output_width() const {
        return widths_.back();
    }

    /// Connection list of neuron j in layer k (k counts from 2, like the widths list from 1).
    const std::vector<std::size_t> &inputs_of(std::size_t layer, std::size_t neuron) const {
        return connections_.at(layer - 2).at(neuron);
    }

    /// Qubits of the neuron unitary inside the (w_{k-1} + w_k)-qubit register of its layer:
    /// its connections in listed order, then its own output qubit.
    std::vector<std::size_t> targets_of(std::size_t layer, std::size_t neuron) const {
        std::vector<std::size_t> t = inputs_of(layer, neuron);
        t.push_back(widths_[layer - 2] + neuron);
        return t;
    }

    bool is_square() const {
        return !widths_.empty() && widths_.front() == widths_.back();
    }

    /// Equal input and output widths with a narrower interior layer.
    bool is_autoencoder() const {
        if (widths_.size() < 3 || !is_square()) {
            return false;
        }
        for (std::size_t k = 1; k + 1 < widths_.size(); k++) {
            if (widths_[k] < widths_.front()) {
                return true;
            }
        }
        return false;
    }

    std::size_t num_parameters() const {
        std::size_t total = 0;
        for (const auto &layer : connections_) {
            for (const auto &neuron : layer) {
                total += (std::size_t{1} << (2 * (neuron.size() + 1))) - 1;
            }
        }
        return total;
    }

    bool operator==(const Topology &) const = default;

    /// "4,2,1,2,4" style label.
    std::string label() const {
        std::string s;
        for (std::size_t i = 0; i < widths_.size(); i++) {
            s += (i ? "," : "") + std::to_string(widths_[i]);
        }
        return s;
    }

   private:
    void validate() const {
        if (widths_.size() < 2) {
            throw std::invalid_argument("topology needs at least two layers");
        }
        for (std::size_t w : widths_) {
            if (w == 0) {
                throw std::invalid_argument("layer width must be positive");
            }
        }
        if (connections_.size() != widths_.size() - 1) {
            throw std::invalid_argument("topology needs one connection list per non-input layer");
        }
        for (std::size_t k = 1; k < widths_.size(); k++) {
            const auto &layer = connections_[k - 1];
            if (layer.size() != widths_[k]) {
                throw std::invalid_argument("layer " + std::to_string(k + 1) + " has the wrong neuron count");
            }
            for (const auto &neuron : layer) {
                std::vector<std::size_t> sorted = neuron;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                    throw std::invalid_argument("neuron lists a connection twice");
                }
                for (std::size_t q : neuron) {
                    if (q >= widths_[k - 1]) {
                        throw std::invalid_argument("connection index outside the previous layer");
                    }
                }
            }
        }
    }

    std::vector<std::size_t> widths_;
    Connections connections_;
};

/// One Hermitian generator per non-input neuron, sized by the neuron's fan-in plus one.
class NetworkParams {
   public:
    using Generators = std::vector<std::vector<HermitianGenerator>>;

    NetworkParams() = default;

    NetworkParams(const Topology &topology, Generators generators) : generators_(std::move(generators)) {
        check(topology);
    }

    static NetworkParams zeros(const Topology &topology) {
        Generators g;
        for (const auto &layer : topology.connections()) {
            auto &out = g.emplace_back();
            for (const auto &neuron : layer) {
                out.push_back(HermitianGenerator::zero(neuron.size() + 1));
            }
        }
        return NetworkParams(topology, std::move(g));
    }

    /// Independent zero-mean Gaussian coefficients with standard deviation `scale`.
    static NetworkParams random(const Topology &topology, double scale, Rng &rng) {
        NetworkParams p = zeros(topology);
        std::normal_distribution<double> g(0.0, scale);
        for (auto &layer : p.generators_) {
            for (auto &neuron : layer) {
                for (double &c : neuron.coefficients()) {
                    c = g(rng);
                }
            }
        }
        return p;
    }

    const Generators &generators() const {
        return generators_;
    }
    const HermitianGenerator &generator(std::size_t layer, std::size_t neuron) const {
        return generators_.at(layer - 2).at(neuron);
    }

    std::size_t size() const {
        std::size_t total = 0;
        for (const auto &layer : generators_) {
            for (const auto &neuron : layer) {
                total += neuron.coefficients().size();
            }
        }
        return total;
    }

    /// Layer-major, then neuron, then coefficient order.
    rvec flatten() const {
        rvec out(static_cast<Eigen::Index>(size()));
        Eigen::Index i = 0;
        for (const auto &layer : generators_) {
            for (const auto &neuron : layer) {
                for (double c : neuron.coefficients()) {
                    out(i++) = c;
                }
            }
        }
        return out;
    }

    NetworkParams with_flat(const rvec &flat) const {
        if (static_cast<std::size_t>(flat.size()) != size()) {
            throw std::invalid_argument("flat parameter vector has the wrong length");
        }
        NetworkParams out = *this;
        Eigen::Index i = 0;
        for (auto &layer : out.generators_) {
            for (auto &neuron : layer) {
                for (double &c : neuron.coefficients()) {
                    c = flat(i++);
                }
            }
        }
        return out;
    }

    bool operator==(const NetworkParams &) const = default;

   private:
    void check(const Topology &topology) const {
        const auto &conn = topology.connections();
        if (generators_.size() != conn.size()) {
            throw std::invalid_argument("parameter layer count does not match topology");
        }
        for (std::size_t k = 0; k < conn.size(); k++) {
            if (generators_[k].size() != conn[k].size()) {
                throw std::invalid_argument("parameter neuron count does not match topology");
            }
            for (std::size_t j = 0; j < conn[k].size(); j++) {
                if (generators_[k][j].num_qubits() != conn[k][j].size() + 1) {
                    throw std::invalid_argument("generator size does not match neuron fan-in");
                }
            }
        }
    }

    Generators generators_;
};

/// Topology together with its parameters; the feed-forward quantum channel.
struct NetworkChannel {
    Topology topology;
    NetworkParams params;

    NetworkChannel() = default;
    NetworkChannel(Topology t, NetworkParams p) : topology(std::move(t)), params(std::move(p)) {
        NetworkParams check(topology, params.generators());
        (void)check;
    }

    bool operator==(const NetworkChannel &) const = default;
};

struct CompiledNeuron {
    std::vector<std::size_t> targets;
    QubitSelection selection;
    ExpDecomposition exp;
    cmat unitary_adjoint;
};

struct CompiledLayer {
    std::size_t prev_width = 0;
    std::size_t width = 0;
    std::vector<CompiledNeuron> neurons;
    QubitSelection output_qubits;  // the w_k fresh qubits of the layer register

    std::size_t register_qubits() const {
        return prev_width + width;
    }
};

/// Neuron unitaries (with their eigendecompositions) and index tables for one parameter setting.
struct CompiledNetwork {
    std::vector<CompiledLayer> layers;

    explicit CompiledNetwork(const NetworkChannel &net) {
        const auto &widths = net.topology.widths();
        for (std::size_t k = 2; k <= widths.size(); k++) {
            const std::size_t a = widths[k - 2], b = widths[k - 1];
            std::vector<std::size_t> out_qubits(b);
            std::iota(out_qubits.begin(), out_qubits.end(), a);
            CompiledLayer layer{a, b, {}, QubitSelection(out_qubits, a + b)};
            for (std::size_t j = 0; j < b; j++) {
                auto targets = net.topology.targets_of(k, j);
                QubitSelection sel(targets, a + b);
                ExpDecomposition exp(net.params.generator(k, j));
                cmat adj = exp.unitary.adjoint();
                layer.neurons.push_back(CompiledNeuron{std::move(targets), std::move(sel), std::move(exp), std::move(adj)});
            }
            layers.push_back(std::move(layer));
        }
    }
};

/// Layer k (k >= 2): attach w_k qubits in |down>, apply U_1 first up to U_{w_k} last, trace out layer k - 1.
/// Works on the full (w_{k-1} + w_k)-qubit density matrix.
inline DensityMatrix layer_channel(std::size_t k, const NetworkChannel &net, const DensityMatrix &rho_prev) {
    const auto &widths = net.topology.widths();
    if (k < 2 || k > widths.size()) {
        throw std::out_of_range("layer index out of range");
    }
    const std::size_t a = widths[k - 2], b = widths[k - 1];
    if (rho_prev.num_qubits() != a) {
        throw std::invalid_argument("layer input width mismatch");
    }
    auto fresh = static_cast<Eigen::Index>(dim_of(b));
    cmat down = cmat::Zero(fresh, fresh);
    down(fresh - 1, fresh - 1) = 1.0;
    cmat x = kron(rho_prev.entries(), down);
    for (std::size_t j = 0; j < b; j++) {
        cmat u = exp_hermitian(net.params.generator(k, j));
        QubitSelection sel(net.topology.targets_of(k, j), a + b);
        apply_on_qubits(x, u, sel);
        x.adjointInPlace();
        apply_on_qubits(x, u, sel);
        x.adjointInPlace();
    }
    x = 0.5 * (x + x.adjoint()).eval();
    std::vector<std::size_t> keep(b);
    std::iota(keep.begin(), keep.end(), a);
    return partial_trace(DensityMatrix(std::move(x)), keep);
}

inline DensityMatrix forward(const NetworkChannel &net, const DensityMatrix &rho_in) {
    if (rho_in.num_qubits() != net.topology.input_width()) {
        throw std::invalid_argument("network input width mismatch");
    }
    DensityMatrix rho = rho_in;
    for (std::size_t k = 2; k <= net.topology.num_layers(); k++) {
        rho = layer_channel(k, net, rho);
    }
    return rho;
}

/// The network applied `times` times in sequence.
inline DensityMatrix stack(const NetworkChannel &net, std::size_t times, const DensityMatrix &rho_in) {
    if (!net.topology.is_square()) {
        throw std::invalid_argument("only networks with equal input and output widths can be stacked");
    }
    if (times < 1) {
        throw std::invalid_argument("stack count must be at least 1");
    }
    DensityMatrix rho = rho_in;
    for (std::size_t t = 0; t < times; t++) {
        rho = forward(net, rho);
    }
    return rho;
}

// Factored evaluation. A density matrix rho on w qubits is carried as a 2^w x r matrix F with
// rho = F F^dagger; neuron unitaries then only touch r columns instead of a full matrix.

/// Factor of the register state rho_prev (x) |down...down><down...down|.
inline cmat attach_fresh_qubits(const cmat &factor, std::size_t b) {
    const std::size_t fresh = dim_of(b);
    cmat w = cmat::Zero(factor.rows() * static_cast<Eigen::Index>(fresh), factor.cols());
    for (Eigen::Index x = 0; x < factor.rows(); x++) {
        w.row(x * static_cast<Eigen::Index>(fresh) + static_cast<Eigen::Index>(fresh - 1)) = factor.row(x);
    }
    return w;
}

/// Factor of tr_{first a qubits}(W W^dagger): rows are the last b qubits.
inline cmat trace_out_leading(const cmat &w, std::size_t a, std::size_t b) {
    const auto fresh = static_cast<Eigen::Index>(dim_of(b));
    const auto prev = static_cast<Eigen::Index>(dim_of(a));
    cmat out(fresh, prev * w.cols());
    for (Eigen::Index x = 0; x < prev; x++) {
        out.middleCols(x * w.cols(), w.cols()) = w.middleRows(x * fresh, fresh);
    }
    return out;
}

/// Replaces a wide factor by one with at most 2^w columns spanning the same density matrix.
inline cmat compress_factor(const cmat &factor) {
    if (factor.cols() <= factor.rows()) {
        return factor;
    }
    cmat rho = factor * factor.adjoint();
    Eigen::SelfAdjointEigenSolver<cmat> es(rho);
    const auto &ev = es.eigenvalues();
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < ev.size(); i++) {
        if (ev(i) > 1e-15) {
            keep++;
        }
    }
    cmat out(factor.rows(), std::max<Eigen::Index>(keep, 1));
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < ev.size(); i++) {
        if (ev(i) > 1e-15) {
            out.col(col++) = std::sqrt(ev(i)) * es.eigenvectors().col(i);
        }
    }
    if (keep == 0) {
        out.col(0) = es.eigenvectors().col(ev.size() - 1) * std::sqrt(std::max(ev(ev.size() - 1), 0.0));
    }
    return out;
}

inline cmat forward_layer_factor(const CompiledLayer &layer, const cmat &factor) {
    cmat w = attach_fresh_qubits(compress_factor(factor), layer.width);
    for (const auto &neuron : layer.neurons) {
        apply_on_qubits(w, neuron.exp.unitary, neuron.selection);
    }
    return trace_out_leading(w, layer.prev_width, layer.width);
}

inline cmat forward_factor(const CompiledNetwork &net, cmat factor) {
    for (const auto &layer : net.layers) {
        factor = forward_layer_factor(layer, factor);
    }
    return compress_factor(factor);
}

inline cmat factor_to_matrix(const cmat &factor) {
    cmat rho = factor * factor.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

/// Fast path for a pure input; agrees with `forward` on |psi><psi|.
inline DensityMatrix forward_pure(const NetworkChannel &net, const StateVector &psi) {
    if (psi.num_qubits() != net.topology.input_width()) {
        throw std::invalid_argument("network input width mismatch");
    }
    CompiledNetwork compiled(net);
    return DensityMatrix(factor_to_matrix(forward_factor(compiled, cmat(psi.amplitudes()))));
}

/// <psi_out| N^times(|psi_in><psi_in|) |psi_out> on the factored path.
inline double stacked_fidelity(const CompiledNetwork &net, const cvec &input, std::size_t times, const cvec &target) {
    cmat factor = input;
    for (std::size_t t = 0; t < times; t++) {
        factor = forward_factor(net, factor);
    }
    return std::clamp((factor.adjoint() * target).squaredNorm(), 0.0, 1.0);
}

// Text format, version 1:
//   qae-network v1
//   topology <w1,w2,...> | <layer 2 neurons> | <layer 3 neurons> ...
//     where a layer lists neurons separated by ';' and each neuron its connections separated by ' '
//   <layer>,<neuron>,<c_1>,...,<c_{4^f-1}>          one line per neuron, 17 significant digits

inline void write_network(std::ostream &out, const NetworkChannel &net) {
    out << "qae-network v1\n";
    out << "topology " << net.topology.label();
    for (const auto &layer : net.topology.connections()) {
        out << " |";
        for (std::size_t j = 0; j < layer.size(); j++) {
            out << (j ? ";" : "");
            for (std::size_t q : layer[j]) {
                out << ' ' << q;
            }
        }
    }
    out << '\n';
    char buf[40];
    for (std::size_t k = 0; k < net.params.generators().size(); k++) {
        const auto &layer = net.params.generators()[k];
        for (std::size_t j = 0; j < layer.size(); j++) {
            out << (k + 2) << ',' << j;
            for (double c : layer[j].coefficients()) {
                std::snprintf(buf, sizeof(buf), ",%.17g", c);
                out << buf;
            }
            out << '\n';
        }
    }
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::size_t parse_index(const std::string &s) {
    std::size_t pos = 0;
    std::string t = trim(s);
    unsigned long long v = 0;
    try {
        v = std::stoull(t, &pos);
    } catch (const std::exception &) {
        throw std::invalid_argument("expected a non-negative integer, got '" + t + "'");
    }
    if (pos != t.size() || t.empty() || t[0] == '-') {
        throw std::invalid_argument("expected a non-negative integer, got '" + t + "'");
    }
    return static_cast<std::size_t>(v);
}

inline double parse_real(const std::string &s) {
    std::string t = trim(s);
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception &) {
        throw std::invalid_argument("expected a number, got '" + t + "'");
    }
    if (pos != t.size()) {
        throw std::invalid_argument("expected a number, got '" + t + "'");
    }
    return v;
}

inline NetworkChannel read_network(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "qae-network v1") {
        throw std::invalid_argument("network file: missing 'qae-network v1' header");
    }
    if (!std::getline(in, line) || line.rfind("topology ", 0) != 0) {
        throw std::invalid_argument("network file: missing topology line");
    }
    auto parts = split(line.substr(9), '|');
    std::vector<std::size_t> widths;
    for (const auto &w : split(parts[0], ',')) {
        widths.push_back(parse_index(w));
    }
    Topology::Connections conn;
    for (std::size_t k = 1; k < parts.size(); k++) {
        auto &layer = conn.emplace_back();
        for (const auto &neuron : split(parts[k], ';')) {
            auto &list = layer.emplace_back();
            std::istringstream ns(neuron);
            std::string tok;
            while (ns >> tok) {
                list.push_back(parse_index(tok));
            }
        }
    }
    Topology topology(std::move(widths), std::move(conn));
    NetworkParams params = NetworkParams::zeros(topology);
    NetworkParams::Generators gens = params.generators();
    std::vector<std::vector<bool>> seen;
    for (const auto &layer : gens) {
        seen.emplace_back(layer.size(), false);
    }
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() < 2) {
            throw std::invalid_argument("network file: malformed neuron line");
        }
        std::size_t k = parse_index(fields[0]), j = parse_index(fields[1]);
        if (k < 2 || k - 2 >= gens.size() || j >= gens[k - 2].size()) {
            throw std::invalid_argument("network file: neuron index outside the topology");
        }
        auto &coeffs = gens[k - 2][j].coefficients();
        if (fields.size() - 2 != coeffs.size()) {
            throw std::invalid_argument("network file: wrong coefficient count for neuron " + std::to_string(k) + "," +
                                        std::to_string(j));
        }
        for (std::size_t i = 0; i < coeffs.size(); i++) {
            coeffs[i] = parse_real(fields[i + 2]);
        }
        seen[k - 2][j] = true;
    }
    for (const auto &layer : seen) {
        for (bool s : layer) {
            if (!s) {
                throw std::invalid_argument("network file: a neuron has no coefficient line");
            }
        }
    }
    return NetworkChannel(topology, NetworkParams(topology, std::move(gens)));
}

inline void save_network(const std::string &path, const NetworkChannel &net) {
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path + " for writing");
    }
    write_network(out, net);
    if (!out) {
        throw std::ios_base::failure("failed writing " + path);
    }
}

inline NetworkChannel load_network(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open " + path);
    }
    return read_network(in);
}

}  // namespace qae

#endif
