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

#ifndef QAE_CLI_H
#define QAE_CLI_H

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "qae/config.h"
#include "qae/dataset.h"
#include "qae/harness.h"
#include "qae/qnn.h"

namespace qae {

inline constexpr const char *kVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitInvalidInput = 2,
    kExitIo = 3,
};

/// Reads QAE_LOG (off | info | debug); anything else leaves the default of info.
inline void configure_logging() {
    const char *env = std::getenv("QAE_LOG");
    std::string level = env ? env : "info";
    if (level == "off") {
        spdlog::set_level(spdlog::level::off);
    } else if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else {
        spdlog::set_level(spdlog::level::info);
    }
}

namespace detail {

template <typename Fn>
int guarded(const char *command, Fn &&fn) {
    try {
        fn();
        return kExitOk;
    } catch (const ConfigError &e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitInvalidInput;
    } catch (const std::ios_base::failure &e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitIo;
    } catch (const std::filesystem::filesystem_error &e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitIo;
    } catch (const std::invalid_argument &e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitInvalidInput;
    } catch (const std::exception &e) {
        spdlog::error("{}: internal error: {}", command, e.what());
        return kExitInternal;
    }
}

inline std::ofstream open_output(const std::filesystem::path &path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    }
    return out;
}

inline void finish(std::ofstream &out, const std::filesystem::path &path) {
    out.flush();
    if (!out) {
        throw std::ios_base::failure("failed writing " + path.string());
    }
}

inline std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

inline std::string point_name(std::size_t index) {
    std::string s = std::to_string(index);
    return s.size() < 2 ? "0" + s : s;
}

}  // namespace detail

struct RunOptions {
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed_override;
};

inline ConfigFile load_config_with(const std::string &config_path, const RunOptions &opts) {
    ConfigFile cfg = load_config(config_path);
    if (opts.seed_override) {
        cfg.experiment.seeds = {*opts.seed_override};
    }
    return cfg;
}

/// Runs the configured sweep and writes metrics.csv, summary.csv, per-seed cost and parameter files,
/// and manifest.json into `out_dir`. An empty `out_dir` falls back to the config's output_dir.
inline int cmd_run(const std::string &config_path, std::string out_dir, const RunOptions &opts = {}) {
    return detail::guarded("run", [&] {
        ConfigFile cfg = load_config_with(config_path, opts);
        if (out_dir.empty()) {
            out_dir = cfg.output_dir;
        }
        if (out_dir.empty()) {
            throw ConfigError("no output directory: pass --out or set 'output_dir'");
        }
        namespace fs = std::filesystem;
        fs::path dir(out_dir);
        fs::create_directories(dir);

        const ExperimentConfig &exp = cfg.experiment;
        auto grid = exp.grid();
        spdlog::info("run '{}': {} noise points x {} seeds, topology {}", exp.name, grid.size(), exp.seeds.size(),
                     exp.topology.label());
        std::vector<MetricsRecord> records;
        for (std::size_t i = 0; i < grid.size(); i++) {
            records.push_back(run_point(exp, grid[i], std::max<std::size_t>(1, opts.threads)));
            const auto &r = records.back();
            spdlog::info("point {} ({}={}): F_bar={:.4f} F_val_bar={:.4f}", i, r.noise_kind, r.noise_label, r.f_bar,
                         r.f_val_bar);
            for (const auto &s : r.per_seed) {
                spdlog::debug("  seed {}: F_val_bar={:.6f} final cost={:.6f}", s.seed, s.f_val_bar,
                              s.costs.empty() ? 0.0 : s.costs.back());
            }
        }

        {
            auto path = dir / "metrics.csv";
            auto out = detail::open_output(path);
            write_metrics_csv(out, records);
            detail::finish(out, path);
        }
        {
            auto path = dir / "summary.csv";
            auto out = detail::open_output(path);
            write_summary_csv(out, records);
            detail::finish(out, path);
        }
        nlohmann::json points = nlohmann::json::array();
        for (std::size_t i = 0; i < records.size(); i++) {
            const auto &r = records[i];
            points.push_back({{"point", detail::point_name(i)},
                              {"noise_kind", r.noise_kind},
                              {"noise_value", r.noise_label}});
            for (const auto &s : r.per_seed) {
                std::string stem = detail::point_name(i) + "_" + std::to_string(s.seed);
                auto cost_path = dir / ("cost_" + stem + ".csv");
                auto out = detail::open_output(cost_path);
                out << "round,cost\n";
                for (std::size_t t = 0; t < s.costs.size(); t++) {
                    out << t << ',' << format_double(s.costs[t]) << '\n';
                }
                detail::finish(out, cost_path);
                save_network((dir / ("params_" + stem + ".txt")).string(), s.network);
            }
        }
        nlohmann::json manifest;
        manifest["tool"] = "qae";
        manifest["version"] = kVersion;
        manifest["timestamp"] = detail::utc_timestamp();
        manifest["config_path"] = config_path;
        manifest["config"] = to_json(exp);
        manifest["points"] = points;
        auto path = dir / "manifest.json";
        auto out = detail::open_output(path);
        out << manifest.dump(2) << '\n';
        detail::finish(out, path);
        spdlog::info("wrote {}", dir.string());
    });
}

/// Writes the dataset of the first sweep point and the first seed (or the override).
inline int cmd_dataset(const std::string &config_path, const std::string &out_path, const RunOptions &opts = {}) {
    return detail::guarded("dataset", [&] {
        ConfigFile cfg = load_config_with(config_path, opts);
        if (out_path.empty()) {
            throw ConfigError("no output path: pass --out");
        }
        const ExperimentConfig &exp = cfg.experiment;
        double value = exp.grid().front();
        std::uint64_t seed = exp.seeds.front();
        Dataset data = build_dataset(exp.plan(), exp.noise_at(value), dataset_seed(seed, value),
                                     std::max<std::size_t>(1, opts.threads));
        data.seed = seed;
        auto out = detail::open_output(out_path);
        write_states(out, to_states_file(data));
        detail::finish(out, out_path);
        spdlog::info("wrote {} pairs and {} tests to {}", data.pairs.size(), data.tests.size(), out_path);
    });
}

// Denoised output format, version 1:
//   # qae-denoised v1 num_qubits=<m> stack=<s>
//   block,<n>,<role>,<index>,<fidelity>        fidelity is empty without a matching ideal state
//   <re,im pairs of row 0>
//   ...                                        2^m rows, row-major
inline void write_denoised_block(std::ostream &out, std::size_t block, const StateRecord &rec, const cmat &rho,
                                 std::optional<double> fidelity) {
    out << "block," << block << ',' << rec.role << ',' << rec.index << ',';
    if (fidelity) {
        out << format_double(*fidelity);
    }
    out << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < rho.rows(); r++) {
        for (Eigen::Index c = 0; c < rho.cols(); c++) {
            std::snprintf(buf, sizeof(buf), "%s%.17g,%.17g", c ? "," : "", rho(r, c).real(), rho(r, c).imag());
            out << buf;
        }
        out << '\n';
    }
}

/// Applies a trained network (`stack` times) to every input, noisy and unlabeled state of a states file.
inline int cmd_denoise(const std::string &params_path, const std::string &states_path, const std::string &out_path,
                       std::size_t stack = 1) {
    return detail::guarded("denoise", [&] {
        NetworkChannel net = load_network(params_path);
        StatesFile states = load_states(states_path);
        if (out_path.empty()) {
            throw ConfigError("no output path: pass --out");
        }
        if (stack < 1) {
            throw std::invalid_argument("stack must be at least 1");
        }
        if (stack > 1 && !net.topology.is_square()) {
            throw std::invalid_argument("stacking needs equal input and output widths");
        }
        if (states.num_qubits != net.topology.input_width()) {
            throw std::invalid_argument("states have " + std::to_string(states.num_qubits) +
                                        " qubits but the network expects " +
                                        std::to_string(net.topology.input_width()));
        }
        std::map<std::size_t, const StateRecord *> ideal;
        std::vector<const StateRecord *> inputs;
        for (const auto &r : states.records) {
            if (r.role == "ideal") {
                ideal.emplace(r.index, &r);
            } else if (r.role == "input" || r.role == "noisy" || r.role == "state") {
                inputs.push_back(&r);
            }
        }
        if (inputs.empty()) {
            throw std::invalid_argument("states file holds no states to denoise");
        }
        const bool can_score = net.topology.output_width() == states.num_qubits;
        CompiledNetwork compiled(net);
        auto out = detail::open_output(out_path);
        out << "# qae-denoised v1 num_qubits=" << net.topology.output_width() << " stack=" << stack << '\n';
        double total = 0;
        std::size_t scored = 0;
        for (std::size_t b = 0; b < inputs.size(); b++) {
            const StateRecord &rec = *inputs[b];
            cmat factor = rec.state.amplitudes();
            for (std::size_t t = 0; t < stack; t++) {
                factor = forward_factor(compiled, factor);
            }
            std::optional<double> fidelity;
            if (rec.role == "noisy" && can_score) {
                auto it = ideal.find(rec.index);
                if (it != ideal.end()) {
                    fidelity = std::clamp((factor.adjoint() * it->second->state.amplitudes()).squaredNorm(), 0.0, 1.0);
                    total += *fidelity;
                    scored++;
                }
            }
            write_denoised_block(out, b, rec, factor_to_matrix(factor), fidelity);
        }
        detail::finish(out, out_path);
        if (scored) {
            spdlog::info("denoised {} states; mean fidelity {:.6f} over {} labeled", inputs.size(),
                         total / static_cast<double>(scored), scored);
        } else {
            spdlog::info("denoised {} states", inputs.size());
        }
    });
}

/// Converts a metrics or summary CSV into gnuplot-ready whitespace-separated blocks.
inline int cmd_plotdata(const std::string &metrics_path, const std::string &out_path) {
    return detail::guarded("plotdata", [&] {
        std::ifstream in(metrics_path);
        if (!in) {
            throw std::ios_base::failure("cannot open " + metrics_path);
        }
        if (out_path.empty()) {
            throw ConfigError("no output path: pass --out");
        }
        std::string line;
        if (!std::getline(in, line)) {
            throw std::invalid_argument("metrics file is empty");
        }
        auto header = split(line, ',');
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < header.size(); i++) {
            col[trim(header[i])] = i;
        }
        for (const char *need : {"noise_kind", "noise_value", "seed", "F_bar", "dF", "F_val_bar", "dF_val"}) {
            if (!col.count(need)) {
                throw std::invalid_argument(std::string("metrics file lacks required column '") + need + "'");
            }
        }
        struct Row {
            std::string label, seed;
            double x, f, df, fv, dfv;
            std::optional<double> finf, dfinf;
        };
        std::vector<Row> rows;
        std::vector<std::string> labels;
        std::size_t line_no = 1;
        auto cell = [&](const std::vector<std::string> &f, const std::string &name) -> std::optional<double> {
            auto it = col.find(name);
            if (it == col.end() || it->second >= f.size() || trim(f[it->second]).empty()) {
                return std::nullopt;
            }
            return parse_real(f[it->second]);
        };
        while (std::getline(in, line)) {
            line_no++;
            if (trim(line).empty()) {
                continue;
            }
            auto f = split(line, ',');
            if (f.size() != header.size()) {
                throw std::invalid_argument("metrics line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(header.size()) + " fields");
            }
            Row r;
            r.label = trim(f[col["noise_value"]]);
            r.seed = trim(f[col["seed"]]);
            if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) {
                labels.push_back(r.label);
            }
            auto last_plus = r.label.rfind('+');
            r.x = parse_real(last_plus == std::string::npos ? r.label : r.label.substr(last_plus + 1));
            auto need = [&](const char *name) {
                auto v = cell(f, name);
                if (!v) {
                    throw std::invalid_argument("metrics line " + std::to_string(line_no) + ": empty " + name);
                }
                return *v;
            };
            r.f = need("F_bar");
            r.df = need("dF");
            r.fv = need("F_val_bar");
            r.dfv = need("dF_val");
            r.finf = cell(f, "F_inf");
            r.dfinf = cell(f, "dF_inf");
            rows.push_back(std::move(r));
        }
        if (rows.empty()) {
            throw std::invalid_argument("metrics file has no data rows");
        }

        auto out = detail::open_output(out_path);
        out << "# qae plot data from " << metrics_path << "\n"
            << "# x is the swept noise value (last stage of a combined label).\n"
            << "# block 0 pre_denoise:  5 columns  x seed F_bar dF point\n"
            << "# block 1 post_denoise: 5 columns  x seed F_val_bar dF_val point\n"
            << "# block 2 baseline:     3 columns  x F_inf dF_inf (only for spin-flip noise)\n"
            << "# seed is 'median' in summary files; point is the 0-based position of the noise value.\n";
        auto point_of = [&](const Row &r) {
            return std::find(labels.begin(), labels.end(), r.label) - labels.begin();
        };
        auto num = [](double v) { return format_double(v); };
        auto xs = [](double v) { return format_short(v); };
        out << "\n# pre_denoise\n";
        for (const auto &r : rows) {
            out << xs(r.x) << ' ' << r.seed << ' ' << num(r.f) << ' ' << num(r.df) << ' ' << point_of(r) << '\n';
        }
        out << "\n\n# post_denoise\n";
        for (const auto &r : rows) {
            out << xs(r.x) << ' ' << r.seed << ' ' << num(r.fv) << ' ' << num(r.dfv) << ' ' << point_of(r) << '\n';
        }
        bool any_baseline = false;
        for (const auto &r : rows) {
            any_baseline = any_baseline || r.finf.has_value();
        }
        if (any_baseline) {
            out << "\n\n# baseline\n";
            std::vector<std::string> seen;
            for (const auto &r : rows) {
                if (!r.finf || std::find(seen.begin(), seen.end(), r.label) != seen.end()) {
                    continue;
                }
                seen.push_back(r.label);
                out << xs(r.x) << ' ' << num(*r.finf) << ' ' << num(r.dfinf.value_or(0.0)) << '\n';
            }
        }
        detail::finish(out, out_path);
    });
}

}  // namespace qae

#endif
