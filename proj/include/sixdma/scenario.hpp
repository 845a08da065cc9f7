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

#ifndef sixdma_scenario_H
#define sixdma_scenario_H

#include "sixdma/channel.hpp"
#include "sixdma/geometry.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace sixdma
{
    // Rotation (alpha = 0) that turns the local x-axis onto the unit vector `normal`
    Eigen::Vector3d outward_rotation(const Eigen::Vector3d &normal);

    // M poses on a Fibonacci lattice over the largest sphere inside the site cube, facing outward.
    // M = 1 gives a single pose at the north pole.
    std::vector<SurfacePose> place_candidate_poses(std::size_t M, const SiteSpace &site);

    // Outward-facing poses at uniformly random points of the same sphere
    std::vector<SurfacePose> random_sphere_poses(std::size_t count, const SiteSpace &site, std::uint64_t seed);

    struct UserRegion
    {
        double distance_min = 20.0;  // [m]
        double distance_max = 800.0; // [m]
        bool upper_half_space = true;
        double path_phase = 0.0; // psi in nu = lambda / (4 pi d) e^{j psi}
    };

    // Users uniform in volume over the spherical annulus (or its upper half)
    std::vector<UserPathState> sample_users(std::size_t K, const UserRegion &region, const CarrierConfig &carrier,
                                            std::uint64_t seed);

    // Single user at distance d with a uniformly random direction from the region
    UserPathState sample_user_at_distance(double distance, const UserRegion &region, const CarrierConfig &carrier,
                                          std::uint64_t seed);

    // Per-user, per-pose channel power ||h_m||^2 under the hybrid-field model
    struct SparsityMap
    {
        Eigen::MatrixXd power; // K x M

        // Poses with non-zero power for user k
        std::vector<std::size_t> visible_poses(std::size_t k) const;
    };

    SparsityMap sparsity_map(std::span<const UserPathState> users, std::span<const SurfacePose> poses,
                             const ArrayLayout &layout, const CarrierConfig &carrier, const AntennaPattern &pattern);

    // log2 det(I_K + (tx_power / noise_power) H^H H) for H of size NB x K
    double sum_capacity(const Eigen::MatrixXcd &H, double noise_power, double tx_power);

    // ||estimate - truth||^2 / ||truth||^2; +inf if the truth is zero
    double channel_nmse(const Eigen::VectorXcd &estimate, const Eigen::VectorXcd &truth);

    // Aperture D = A sqrt(3) of the site cube
    double site_aperture(const SiteSpace &site);
}

#endif
