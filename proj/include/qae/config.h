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

#ifndef QAE_CONFIG_H
#define QAE_CONFIG_H

#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qae/harness.h"

namespace qae {

/// Malformed or invalid experiment configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

namespace detail {

using json = nlohmann::json;

inline void allow_keys(const json &obj, const std::string &path, std::initializer_list<const char *> keys) {
    if (!obj.is_object()) {
        throw ConfigError(path + ": expected an object");
    }
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto &item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown key '" + (path.empty() ? "" : path + ".") + item.key() + "'");
        }
    }
}

inline const json &require(const json &obj, const std::string &path, const char *key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError("missing key '" + (path.empty() ? "" : path + ".") + key + "'");
    }
    return *it;
}

inline std::string join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
}

inline double as_number(const json &v, const std::string &path) {
    if (!v.is_number()) {
        throw ConfigError("'" + path + "' must be a number");
    }
    return v.get<double>();
}

inline std::size_t as_count(const json &v, const std::string &path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError("'" + path + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

/// A phase given as a number of radians or as a string "pi", "pi/3", "2pi/3", "2*pi/3".
inline double as_phase(const json &v, const std::string &path) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (!v.is_string()) {
        throw ConfigError("'" + path + "' must be a number or a multiple of pi such as \"2*pi/3\"");
    }
    std::string s;
    for (char c : v.get<std::string>()) {
        if (c != ' ' && c != '*') {
            s += c;
        }
    }
    auto at = s.find("pi");
    if (at == std::string::npos) {
        throw ConfigError("'" + path + "': cannot parse phase '" + v.get<std::string>() + "'");
    }
    try {
        double num = at == 0 ? 1.0 : std::stod(s.substr(0, at));
        double den = 1.0;
        std::string rest = s.substr(at + 2);
        if (!rest.empty()) {
            if (rest[0] != '/') {
                throw std::invalid_argument("bad");
            }
            std::size_t used = 0;
            den = std::stod(rest.substr(1), &used);
            if (used != rest.size() - 1) {
                throw std::invalid_argument("bad");
            }
        }
        return num * std::numbers::pi / den;
    } catch (const std::exception &) {
        throw ConfigError("'" + path + "': cannot parse phase '" + v.get<std::string>() + "'");
    }
}

inline std::vector<PhaseCount> parse_phase_counts(const json &arr, const std::string &path, const char *count_key) {
    if (!arr.is_array() || arr.empty()) {
        throw ConfigError("'" + path + "' must be a nonempty array");
    }
    std::vector<PhaseCount> out;
    for (std::size_t i = 0; i < arr.size(); i++) {
        std::string p = path + "[" + std::to_string(i) + "]";
        allow_keys(arr[i], p, {"phase", count_key});
        out.push_back({as_phase(require(arr[i], p, "phase"), join(p, "phase")),
                       as_count(require(arr[i], p, count_key), join(p, count_key))});
    }
    return out;
}

inline Topology parse_topology(const json &t, ExperimentConfig &cfg) {
    const std::string path = "topology";
    if (!t.is_object()) {
        throw ConfigError("'topology' must be an object");
    }
    auto kind_it = t.find("kind");
    if (kind_it == t.end() || !kind_it->is_string()) {
        throw ConfigError("missing key 'topology.kind'");
    }
    std::string kind = kind_it->get<std::string>();
    cfg.topology_kind = kind;
    auto widths_of = [&](const json &w) {
        if (!w.is_array() || w.size() < 2) {
            throw ConfigError("'topology.widths' must be an array of at least two widths");
        }
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < w.size(); i++) {
            out.push_back(as_count(w[i], "topology.widths[" + std::to_string(i) + "]"));
        }
        return out;
    };
    try {
        if (kind == "dense") {
            allow_keys(t, path, {"kind", "widths"});
            return Topology::dense(widths_of(require(t, path, "widths")));
        }
        if (kind == "sparse_4_2_1_2_4") {
            allow_keys(t, path, {"kind"});
            return Topology::sparse_4_2_1_2_4();
        }
        if (kind == "custom") {
            allow_keys(t, path, {"kind", "widths", "connections"});
            auto widths = widths_of(require(t, path, "widths"));
            const json &c = require(t, path, "connections");
            Topology::Connections conn;
            if (!c.is_array()) {
                throw ConfigError("'topology.connections' must be an array");
            }
            for (std::size_t k = 0; k < c.size(); k++) {
                auto &layer = conn.emplace_back();
                if (!c[k].is_array()) {
                    throw ConfigError("'topology.connections[" + std::to_string(k) + "]' must be an array");
                }
                for (std::size_t j = 0; j < c[k].size(); j++) {
                    auto &neuron = layer.emplace_back();
                    std::string p = "topology.connections[" + std::to_string(k) + "][" + std::to_string(j) + "]";
                    if (!c[k][j].is_array()) {
                        throw ConfigError("'" + p + "' must be an array");
                    }
                    for (std::size_t q = 0; q < c[k][j].size(); q++) {
                        neuron.push_back(as_count(c[k][j][q], p));
                    }
                }
            }
            return Topology(std::move(widths), std::move(conn));
        }
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("'topology': ") + e.what());
    }
    throw ConfigError("'topology.kind' must be dense, sparse_4_2_1_2_4 or custom");
}

inline NoiseSpec parse_noise(const json &arr) {
    if (!arr.is_array() || arr.empty()) {
        throw ConfigError("'noise' must be a nonempty array of stages");
    }
    std::vector<NoiseStage> stages;
    for (std::size_t i = 0; i < arr.size(); i++) {
        std::string p = "noise[" + std::to_string(i) + "]";
        const json &s = arr[i];
        if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) {
            throw ConfigError("missing key '" + p + ".kind'");
        }
        std::string kind = s["kind"].get<std::string>();
        if (kind == "spin_flip") {
            allow_keys(s, p, {"kind", "p"});
            stages.push_back(SpinFlipSpec{as_number(require(s, p, "p"), p + ".p")});
        } else if (kind == "brownian") {
            allow_keys(s, p, {"kind", "q", "steps"});
            BrownianSpec b{as_number(require(s, p, "q"), p + ".q"), 20};
            if (s.contains("steps")) {
                b.steps = as_count(s["steps"], p + ".steps");
            }
            stages.push_back(b);
        } else if (kind == "depolarizing") {
            allow_keys(s, p, {"kind", "p_u"});
            stages.push_back(DepolarizingSpec{as_number(require(s, p, "p_u"), p + ".p_u")});
        } else {
            throw ConfigError("'" + p + ".kind' must be spin_flip, brownian or depolarizing");
        }
    }
    try {
        return NoiseSpec(std::move(stages));
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("'noise': ") + e.what());
    }
}

inline void parse_train(const json &t, TrainConfig &tc) {
    const std::string path = "train";
    allow_keys(t, path, {"rounds", "learning_rate", "beta1", "beta2", "epsilon", "init_scale", "gradient"});
    if (t.contains("rounds")) {
        tc.rounds = as_count(t["rounds"], "train.rounds");
    }
    if (t.contains("learning_rate")) {
        tc.optimizer.learning_rate = as_number(t["learning_rate"], "train.learning_rate");
    }
    if (t.contains("beta1")) {
        tc.optimizer.beta1 = as_number(t["beta1"], "train.beta1");
    }
    if (t.contains("beta2")) {
        tc.optimizer.beta2 = as_number(t["beta2"], "train.beta2");
    }
    if (t.contains("epsilon")) {
        tc.optimizer.epsilon = as_number(t["epsilon"], "train.epsilon");
    }
    if (t.contains("init_scale")) {
        tc.init_scale = as_number(t["init_scale"], "train.init_scale");
    }
    if (t.contains("gradient")) {
        const json &g = t["gradient"];
        if (g == "analytic") {
            tc.mode = GradientMode::analytic;
        } else if (g == "finite_difference") {
            tc.mode = GradientMode::finite_difference;
        } else {
            throw ConfigError("'train.gradient' must be analytic or finite_difference");
        }
    }
}

}  // namespace detail

struct ConfigFile {
    ExperimentConfig experiment;
    std::string output_dir;
    nlohmann::json source;
};

/// "line L, column C" for a byte offset into `text`.
inline std::string line_column(const std::string &text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); i++) {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline ConfigFile parse_config(const std::string &text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        std::string what = e.what();
        throw ConfigError("malformed JSON at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + what);
    }
    detail::allow_keys(doc, "", {"schema_version", "name", "topology", "stack", "target", "noise", "sweep", "train",
                                 "seeds", "filter_max_flips", "output_dir"});
    const json &version = detail::require(doc, "", "schema_version");
    if (!version.is_number_integer() || version.get<int>() != kConfigSchemaVersion) {
        throw ConfigError("'schema_version' must be " + std::to_string(kConfigSchemaVersion));
    }

    ConfigFile out;
    out.source = doc;
    ExperimentConfig &cfg = out.experiment;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) {
            throw ConfigError("'name' must be a string");
        }
        cfg.name = doc["name"].get<std::string>();
    }
    cfg.topology = detail::parse_topology(detail::require(doc, "", "topology"), cfg);
    if (doc.contains("stack")) {
        cfg.stack = detail::as_count(doc["stack"], "stack");
    }

    const json &target = detail::require(doc, "", "target");
    detail::allow_keys(target, "target", {"num_qubits", "train", "test"});
    cfg.num_qubits = detail::as_count(detail::require(target, "target", "num_qubits"), "target.num_qubits");
    cfg.train_phases = detail::parse_phase_counts(detail::require(target, "target", "train"), "target.train", "pairs");
    const json &test = detail::require(target, "target", "test");
    if (!test.is_object() || !test.contains("rule") || !test["rule"].is_string()) {
        throw ConfigError("missing key 'target.test.rule'");
    }
    std::string rule = test["rule"].get<std::string>();
    if (rule == "fixed") {
        detail::allow_keys(test, "target.test", {"rule", "phases"});
        cfg.test_rule = TestRule::fixed;
        cfg.test_phases =
            detail::parse_phase_counts(detail::require(test, "target.test", "phases"), "target.test.phases", "count");
    } else if (rule == "random_open_interval") {
        detail::allow_keys(test, "target.test", {"rule", "count", "low", "high"});
        cfg.test_rule = TestRule::random_open_interval;
        cfg.test_phases.clear();
        cfg.random_test_count = detail::as_count(detail::require(test, "target.test", "count"), "target.test.count");
        if (test.contains("low")) {
            cfg.random_test_low = detail::as_phase(test["low"], "target.test.low");
        }
        if (test.contains("high")) {
            cfg.random_test_high = detail::as_phase(test["high"], "target.test.high");
        }
    } else {
        throw ConfigError("'target.test.rule' must be fixed or random_open_interval");
    }

    cfg.noise = detail::parse_noise(detail::require(doc, "", "noise"));
    if (doc.contains("sweep")) {
        const json &s = doc["sweep"];
        detail::allow_keys(s, "sweep", {"stage", "values"});
        if (s.contains("stage")) {
            cfg.sweep_stage = detail::as_count(s["stage"], "sweep.stage");
        }
        const json &values = detail::require(s, "sweep", "values");
        if (!values.is_array() || values.empty()) {
            throw ConfigError("'sweep.values' must be a nonempty array");
        }
        for (std::size_t i = 0; i < values.size(); i++) {
            cfg.sweep_values.push_back(detail::as_number(values[i], "sweep.values[" + std::to_string(i) + "]"));
        }
    }
    if (doc.contains("train")) {
        detail::parse_train(doc["train"], cfg.train);
    }
    if (doc.contains("seeds")) {
        const json &seeds = doc["seeds"];
        if (!seeds.is_array() || seeds.empty()) {
            throw ConfigError("'seeds' must be a nonempty array");
        }
        cfg.seeds.clear();
        for (std::size_t i = 0; i < seeds.size(); i++) {
            cfg.seeds.push_back(detail::as_count(seeds[i], "seeds[" + std::to_string(i) + "]"));
        }
    }
    if (doc.contains("filter_max_flips")) {
        cfg.filter_max_flips = detail::as_count(doc["filter_max_flips"], "filter_max_flips");
    }
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) {
            throw ConfigError("'output_dir' must be a string");
        }
        out.output_dir = doc["output_dir"].get<std::string>();
    }

    try {
        cfg.validate();
        for (double v : cfg.sweep_values) {
            cfg.noise_at(v);
        }
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return out;
}

inline ConfigFile load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open config " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Resolved configuration echoed into run manifests.
inline nlohmann::json to_json(const ExperimentConfig &cfg) {
    using nlohmann::json;
    json j;
    j["name"] = cfg.name;
    j["topology"] = {{"kind", cfg.topology_kind}, {"widths", cfg.topology.widths()},
                     {"connections", cfg.topology.connections()}};
    j["stack"] = cfg.stack;
    json train = json::array(), test = json::array();
    for (const auto &pc : cfg.train_phases) {
        train.push_back({{"phase", pc.phase}, {"pairs", pc.count}});
    }
    j["target"] = {{"num_qubits", cfg.num_qubits}, {"train", train}};
    if (cfg.test_rule == TestRule::fixed) {
        for (const auto &pc : cfg.test_phases) {
            test.push_back({{"phase", pc.phase}, {"count", pc.count}});
        }
        j["target"]["test"] = {{"rule", "fixed"}, {"phases", test}};
    } else {
        j["target"]["test"] = {{"rule", "random_open_interval"},
                               {"count", cfg.random_test_count},
                               {"low", cfg.random_test_low},
                               {"high", cfg.random_test_high}};
    }
    json noise = json::array();
    for (const auto &s : cfg.noise.stages) {
        if (auto *f = std::get_if<SpinFlipSpec>(&s)) {
            noise.push_back({{"kind", "spin_flip"}, {"p", f->p}});
        } else if (auto *b = std::get_if<BrownianSpec>(&s)) {
            noise.push_back({{"kind", "brownian"}, {"q", b->q}, {"steps", b->steps}});
        } else if (auto *d = std::get_if<DepolarizingSpec>(&s)) {
            noise.push_back({{"kind", "depolarizing"}, {"p_u", d->p_u}});
        }
    }
    j["noise"] = noise;
    j["sweep"] = {{"stage", cfg.sweep_stage}, {"values", cfg.grid()}};
    j["train"] = {{"rounds", cfg.train.rounds},
                  {"learning_rate", cfg.train.optimizer.learning_rate},
                  {"beta1", cfg.train.optimizer.beta1},
                  {"beta2", cfg.train.optimizer.beta2},
                  {"epsilon", cfg.train.optimizer.epsilon},
                  {"init_scale", cfg.train.init_scale},
                  {"gradient", cfg.train.mode == GradientMode::analytic ? "analytic" : "finite_difference"}};
    j["seeds"] = cfg.seeds;
    j["filter_max_flips"] = cfg.filter_max_flips;
    return j;
}

}  // namespace qae

#endif
