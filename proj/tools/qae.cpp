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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qae/cli.h"

int main(int argc, char **argv) {
    qae::configure_logging();

    CLI::App app{"qae: train quantum autoencoders that denoise GHZ states and sweep noise strengths"};
    app.footer(
        "Exit codes:\n"
        "  0  success\n"
        "  1  internal error\n"
        "  2  invalid config, parameter or states file (the message names the key or line)\n"
        "  3  I/O failure\n"
        "Environment:\n"
        "  QAE_LOG=off|info|debug  log verbosity on stderr (default info)");
    app.require_subcommand(1);
    app.set_version_flag("--version", qae::kVersion);

    std::string config, out, params, states, metrics;
    std::size_t threads = 1;
    std::size_t stack = 1;
    std::optional<std::uint64_t> seed_override;

    auto *run = app.add_subcommand("run", "run the configured noise sweep and write metrics, costs and parameters");
    run->add_option("--config", config, "experiment config (JSON)")->required();
    run->add_option("--out", out, "output directory (defaults to the config's output_dir)");
    run->add_option("--threads", threads, "worker threads; results do not depend on this")->check(CLI::PositiveNumber);
    run->add_option("--seed-override", seed_override, "use this single seed instead of the configured seeds");

    auto *dataset = app.add_subcommand("dataset", "write the dataset of the first noise point and seed");
    dataset->add_option("--config", config, "experiment config (JSON)")->required();
    dataset->add_option("--out", out, "states file to write")->required();
    dataset->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    dataset->add_option("--seed-override", seed_override, "seed to use instead of the first configured seed");

    auto *denoise = app.add_subcommand("denoise", "apply a trained network to the states of a states file");
    denoise->add_option("--params", params, "trained parameter file")->required();
    denoise->add_option("--states", states, "states file")->required();
    denoise->add_option("--out", out, "output file of density matrices")->required();
    denoise->add_option("--stack", stack, "apply the network this many times")->check(CLI::PositiveNumber);

    auto *plot = app.add_subcommand("plotdata", "turn metrics.csv or summary.csv into gnuplot data blocks");
    plot->add_option("--metrics", metrics, "metrics or summary CSV")->required();
    plot->add_option("--out", out, "data file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? qae::kExitOk : qae::kExitInvalidInput;
    }

    qae::RunOptions opts{threads, seed_override};
    if (*run) {
        return qae::cmd_run(config, out, opts);
    }
    if (*dataset) {
        return qae::cmd_dataset(config, out, opts);
    }
    if (*denoise) {
        return qae::cmd_denoise(params, states, out, stack);
    }
    if (*plot) {
        return qae::cmd_plotdata(metrics, out);
    }
    return qae::kExitInternal;
}
