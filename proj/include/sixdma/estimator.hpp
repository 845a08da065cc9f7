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

#ifndef sixdma_estimator_H
#define sixdma_estimator_H

#include "sixdma/channel.hpp"
#include "sixdma/geometry.hpp"
#include "sixdma/grid.hpp"
#include "sixdma/pilot.hpp"

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

namespace sixdma
{
    // Raised when a path gain is requested for a candidate that every involved pose sees with zero gain
    class DarkCandidateError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Everything the estimator needs to know about the antenna hardware
    struct EstimatorModel
    {
        ArrayLayout layout;
        CarrierConfig carrier;
        AntennaPattern pattern = AntennaPattern::directive();
    };

    struct CoarseEstimate
    {
        std::size_t pose_index = 0;
        Candidate polar;
        cdouble path_gain{};
        double objective = 0.0;
        Eigen::Vector3d cartesian = Eigen::Vector3d::Zero();
        bool flagged = false; // objective is 0 on the whole grid
    };

    struct ClusterState
    {
        std::vector<std::vector<std::size_t>> clusters; // indices into the estimate list
        std::vector<Eigen::Vector3d> centers;
        double threshold = 0.0;

        std::size_t count() const { return clusters.size(); }
    };

    struct LargestCluster
    {
        std::size_t cluster_index = 0;
        std::vector<std::size_t> members;
        Eigen::Vector3d center = Eigen::Vector3d::Zero();
    };

    struct RefinedEstimate
    {
        Candidate polar;
        cdouble path_gain{};
        double objective = 0.0;
        std::vector<std::size_t> pose_indices; // poses that contributed

        UserPathState path() const { return {polar.distance, polar.doa(), path_gain}; }
    };

    // |(Gamma sqrt(g) e^{-jkd_m} a)^H ybar|^2 / ||Gamma sqrt(g) e^{-jkd_m} a||^2, or 0 if the pose is dark
    double coarse_objective(const WhitenedMeasurement &whitened, const SurfacePose &pose, const EstimatorModel &model,
                            const Candidate &candidate);

    // Closed-form least-squares path gain at a candidate. Throws DarkCandidateError if g = 0.
    cdouble estimate_path_gain(const WhitenedMeasurement &whitened, const SurfacePose &pose,
                               const EstimatorModel &model, const Candidate &candidate);

    // Exhaustive search over the grid; ties go to the smallest grid index
    CoarseEstimate coarse_search(const WhitenedMeasurement &whitened, const SurfacePose &pose,
                                 const EstimatorModel &model, const SearchGrid &grid, std::size_t pose_index = 0,
                                 std::size_t threads = 1);

    // Sequential single-pass clustering of the Cartesian estimates with threshold epsilon
    ClusterState cluster_estimates(std::span<const CoarseEstimate> estimates, double epsilon);

    // Cardinality ties go to the cluster created first. Throws if there are no clusters.
    LargestCluster select_largest_cluster(const ClusterState &state);

    // Joint search over the grid with all member poses; same tie rule as coarse_search.
    // Throws DarkCandidateError if every candidate is dark for every member.
    RefinedEstimate refine_joint(std::span<const WhitenedMeasurement> whitened, std::span<const SurfacePose> poses,
                                 const EstimatorModel &model, const SearchGrid &grid,
                                 std::span<const std::size_t> pose_indices = {}, std::size_t threads = 1);

    // Hybrid-field channel of `pose` at the refined parameters
    ChannelVector reconstruct_channel(const RefinedEstimate &refined, const SurfacePose &pose,
                                      const EstimatorModel &model);

    struct Algorithm1Config
    {
        GridSpec coarse;
        FineGridSpec fine;
        double epsilon = 0.0; // <= 0 selects default_cluster_threshold(coarse)
        std::size_t threads = 1;
    };

    struct Algorithm1Diagnostics
    {
        std::vector<CoarseEstimate> coarse;        // one per measurement, in input order
        std::vector<std::size_t> clustered;        // indices of estimates that entered clustering
        ClusterState clusters;                     // indices refer to `clustered`
        LargestCluster largest;                    // members refer to measurement indices
        std::size_t coarse_grid_size = 0;
        std::size_t fine_grid_size = 0;
        double epsilon = 0.0;
        double stage1_seconds = 0.0;
        double stage2_seconds = 0.0;
    };

    struct Algorithm1Result
    {
        RefinedEstimate estimate;
        Algorithm1Diagnostics diagnostics;
    };

    // Whitening, per-pose coarse search, clustering, largest cluster and fine joint refinement.
    // Estimates flagged as all-zero (noiseless dark poses) do not enter clustering.
    Algorithm1Result run_algorithm1(std::span<const MeasurementBatch> measurements, const EstimatorModel &model,
                                    const Algorithm1Config &config);

    // LS baseline: min-norm channel estimate per pose, then a coherent joint grid search
    // (coarse grid, then the fine window around the coarse winner) over all poses
    RefinedEstimate ls_baseline(std::span<const MeasurementBatch> measurements, const EstimatorModel &model,
                                const GridSpec &coarse, const FineGridSpec &fine, std::size_t threads = 1);

    // Minimum-norm solution of y = W h. Throws std::invalid_argument if W is rank deficient.
    Eigen::VectorXcd min_norm_channel_estimate(const MeasurementBatch &batch);
}

#endif
