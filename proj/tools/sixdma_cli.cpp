// SPDX-License-Identifier: Apache-2.0
//
// sixdma - hybrid-field channel modelling and estimation for 6D movable antennas
// Copyright (C) 2026 The sixdma authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "sixdma/experiment.hpp"
#include "sixdma/selftest.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

int main(int argc, char **argv)
{
    CLI::App app{"sixdma: hybrid-field 6DMA channel simulation and estimation"};
    app.require_subcommand(1);

    auto *run = app.add_subcommand("run", "Run the experiment described by a JSON config file");
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t threads = 0;
    bool allow_huge_grid = false;
    run->add_option("config", config_path, "Experiment configuration (JSON)")->required();
    auto *seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");
    auto *out_opt = run->add_option("--out", out_dir,
                                    std::string("Output directory (overrides the config and $") +
                                        sixdma::output_dir_env + ")");
    auto *threads_opt = run->add_option("--threads", threads, "Worker threads, 0 = hardware concurrency");
    run->add_flag("--allow-huge-grid", allow_huge_grid, "Allow search grids above the safety limit");

    auto *selftest = app.add_subcommand("selftest", "Run the fast invariant checks");
    bool inject_fault = false;
    selftest->add_flag("--inject-rotation-fault", inject_fault, "Perturb rotation matrices (negative control)");

    auto *print = app.add_subcommand("print-config", "Print the resolved default configuration of an experiment kind");
    std::string kind;
    print->add_option("kind", kind, "sparsity-map, capacity-vs-distance, mse-vs-snr or single-run")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            sixdma::RunOptions options;
            if (*seed_opt)
                options.seed = seed;
            if (*out_opt)
                options.output_dir = out_dir;
            if (*threads_opt)
                options.threads = threads;
            options.allow_huge_grid = allow_huge_grid;
            const auto result = sixdma::run_experiment(sixdma::load_config(config_path), options);
            std::printf("wrote %s\nwrote %s\nwall time %.2f s\n", result.csv_path.string().c_str(),
                        result.json_path.string().c_str(), result.wall_seconds);
            return 0;
        }
        if (*selftest)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const auto checks = sixdma::run_selftest({inject_fault});
            int failed = 0;
            for (const auto &c : checks)
            {
                std::printf("%s  %s  (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
                failed += c.passed ? 0 : 1;
            }
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("%d of %zu checks failed in %.2f s\n", failed, checks.size(), s);
            return failed == 0 ? 0 : 1;
        }
        if (*print)
        {
            std::cout << sixdma::config_to_json(sixdma::default_config(sixdma::parse_experiment_kind(kind))) << '\n';
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
