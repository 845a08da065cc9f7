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

#ifndef sixdma_experiment_H
#define sixdma_experiment_H

#include "sixdma/channel.hpp"
#include "sixdma/estimator.hpp"
#include "sixdma/geometry.hpp"
#include "sixdma/grid.hpp"
#include "sixdma/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sixdma
{
    inline constexpr const char *library_version = "0.1.0";

    // Environment variable that overrides the configured output directory
    inline constexpr const char *output_dir_env = "SIXDMA_OUTPUT_DIR";

    // Invalid configuration; the message starts with the offending key
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    enum class ExperimentKind
    {
        sparsity_map,
        capacity_vs_distance,
        mse_vs_snr,
        single_run
    };

    const char *to_string(ExperimentKind kind);
    ExperimentKind parse_experiment_kind(const std::string &name);

    struct PatternConfig
    {
        std::string kind = "directive"; // "directive" or "isotropic"
        double max_gain_dbi = 8.0;
        double theta_3db_deg = 65.0;
        double phi_3db_deg = 65.0;
        double side_lobe_limit_db = 30.0;
        double max_attenuation_db = 30.0;
        std::optional<double> sparsity_floor_dbi; // unset: only the back half-space is dark

        AntennaPattern build() const;
    };

    struct ScenarioConfig
    {
        std::size_t B = 8;  // deployed surfaces
        std::size_t N = 16; // antennas per surface
        std::size_t K = 25; // users
        std::size_t M = 32; // candidate position-rotation pairs
        std::size_t T = 10; // pilot slots per pair
        double site_side_length = 0.5;           // A in [m]
        double carrier_frequency = 100e9;        // [Hz]
        std::optional<double> antenna_spacing;   // unset: lambda / 2
        double distance_min = 20.0;              // [m]
        double distance_max = 800.0;             // [m]
        bool upper_half_space = true;            // users above the horizontal plane only
        double path_phase = 0.0;                 // [rad]
        NearFieldGain near_field_gain = NearFieldGain::free_space_taper;
        PatternConfig pattern;

        CarrierConfig carrier() const;
        SiteSpace site() const;
        UserRegion region() const;
        ArrayLayout layout() const;
        EstimatorModel model() const;
    };

    struct GridConfig
    {
        std::string preset = "desk"; // "desk", "paper" or "custom"
        GridSpec coarse = GridSpec::desk();
        FineGridSpec fine = FineGridSpec::desk();
        std::optional<double> epsilon; // unset: twice the coarse cell diagonal at D_max
    };

    struct CapacityConfig
    {
        std::vector<double> distances{20.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0};
        double rho_db = 110.0; // transmit-power to noise-power ratio
    };

    struct MseConfig
    {
        std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
        std::vector<std::size_t> m_values; // empty: scenario.M only
        std::size_t held_out_poses = 10;
        bool include_ls = true;
    };

    struct ExperimentConfig
    {
        ExperimentKind kind = ExperimentKind::single_run;
        std::uint64_t seed = 1;
        std::size_t trials = 100;
        std::size_t threads = 0; // 0: hardware concurrency
        std::string output_dir = "results";
        ScenarioConfig scenario;
        GridConfig grid;
        CapacityConfig capacity;
        MseConfig mse;

        // Throws ConfigError naming the offending key
        void validate() const;
    };

    // Defaults for a kind, with the kind-specific trial count
    ExperimentConfig default_config(ExperimentKind kind);

    ExperimentConfig parse_config(const std::string &json_text);
    ExperimentConfig load_config(const std::filesystem::path &path);

    // Resolved configuration as pretty-printed JSON. Reloading it gives the same configuration.
    std::string config_to_json(const ExperimentConfig &config, bool include_execution = true);

    struct RunOptions
    {
        std::optional<std::uint64_t> seed;
        std::optional<std::filesystem::path> output_dir;
        std::optional<std::size_t> threads;
        bool allow_huge_grid = false;
    };

    struct RunResult
    {
        std::filesystem::path json_path;
        std::filesystem::path csv_path;
        std::string csv; // contents of the tabular file
        double wall_seconds = 0.0;
    };

    // Applies overrides, runs the experiment and writes <kind>.json and <kind>.csv.
    // Partial outputs are removed on failure.
    RunResult run_experiment(ExperimentConfig config, const RunOptions &options = {});

    // Per-point aggregates; exposed for tests and the acceptance harness
    struct MsePoint
    {
        std::size_t M = 0;
        double snr_db = 0.0;
        double nmse_alg1 = 0.0, stderr_alg1 = 0.0;
        double nmse_ls = 0.0, stderr_ls = 0.0;
        std::size_t trials = 0;
    };

    std::vector<MsePoint> mse_vs_snr(const ExperimentConfig &config);

    struct CapacityPoint
    {
        double distance = 0.0;
        double far = 0.0, far_stderr = 0.0;
        double near = 0.0, near_stderr = 0.0;
        double hybrid = 0.0, hybrid_stderr = 0.0;
        double hybrid_closer_fraction = 0.0; // draws with |C_hybrid - C_near| < |C_far - C_near|
        std::size_t trials = 0;
    };

    std::vector<CapacityPoint> capacity_vs_distance(const ExperimentConfig &config);
}

#endif
