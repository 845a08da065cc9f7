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

#include "sixdma/scenario.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sixdma
{
    Eigen::Vector3d outward_rotation(const Eigen::Vector3d &normal)
    {
        // First column of R with alpha = 0 is (cb cg, -sg, sb cg)
        const Eigen::Vector3d n = normal.normalized();
        const double gamma = -std::asin(std::clamp(n(1), -1.0, 1.0));
        const double beta = std::atan2(n(2), n(0));
        return {0.0, wrap_two_pi(beta), wrap_two_pi(gamma)};
    }

    std::vector<SurfacePose> place_candidate_poses(std::size_t M, const SiteSpace &site)
    {
        if (M == 0)
            throw std::invalid_argument("place_candidate_poses: M must be at least 1");
        const double radius = 0.5 * site.side_length;
        std::vector<SurfacePose> poses;
        poses.reserve(M);
        if (M == 1)
        {
            poses.emplace_back(site.center + Eigen::Vector3d(0.0, 0.0, radius), outward_rotation(Eigen::Vector3d::UnitZ()));
            return poses;
        }

        const double golden_angle = pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < M; ++i)
        {
            const double z = 1.0 - (2.0 * double(i) + 1.0) / double(M);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden_angle * double(i);
            const Eigen::Vector3d n(r * std::cos(phi), r * std::sin(phi), z);
            poses.emplace_back(site.center + radius * n, outward_rotation(n));
        }
        return poses;
    }

    std::vector<SurfacePose> random_sphere_poses(std::size_t count, const SiteSpace &site, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<SurfacePose> poses;
        poses.reserve(count);
        while (poses.size() < count)
        {
            Eigen::Vector3d n(normal(rng), normal(rng), normal(rng));
            const double len = n.norm();
            if (!(len > 1e-12))
                continue;
            n /= len;
            poses.emplace_back(site.center + 0.5 * site.side_length * n, outward_rotation(n));
        }
        return poses;
    }

    namespace
    {
        void check_region(const UserRegion &region)
        {
            if (!(region.distance_min > 0.0) || !(region.distance_max >= region.distance_min))
                throw std::invalid_argument("UserRegion: need 0 < distance_min <= distance_max");
        }

        DoaAngles random_direction(std::mt19937_64 &rng, bool upper_half_space)
        {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double s = upper_half_space ? unit(rng) : 2.0 * unit(rng) - 1.0;
            const double azimuth = -pi + 2.0 * pi * unit(rng);
            return {azimuth, std::asin(s)};
        }
    }

    std::vector<UserPathState> sample_users(std::size_t K, const UserRegion &region, const CarrierConfig &carrier,
                                            std::uint64_t seed)
    {
        check_region(region);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double lo3 = std::pow(region.distance_min, 3), hi3 = std::pow(region.distance_max, 3);

        std::vector<UserPathState> users(K);
        for (auto &u : users)
        {
            u.distance = std::cbrt(lo3 + unit(rng) * (hi3 - lo3));
            u.distance = std::clamp(u.distance, region.distance_min, region.distance_max);
            u.doa = random_direction(rng, region.upper_half_space);
            u.path_gain = free_space_path_gain(u.distance, carrier, region.path_phase);
        }
        return users;
    }

    UserPathState sample_user_at_distance(double distance, const UserRegion &region, const CarrierConfig &carrier,
                                          std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        UserPathState u;
        u.distance = distance;
        u.doa = random_direction(rng, region.upper_half_space);
        u.path_gain = free_space_path_gain(distance, carrier, region.path_phase);
        return u;
    }

    std::vector<std::size_t> SparsityMap::visible_poses(std::size_t k) const
    {
        std::vector<std::size_t> v;
        for (Eigen::Index m = 0; m < power.cols(); ++m)
            if (power(Eigen::Index(k), m) > 0.0)
                v.push_back(std::size_t(m));
        return v;
    }

    SparsityMap sparsity_map(std::span<const UserPathState> users, std::span<const SurfacePose> poses,
                             const ArrayLayout &layout, const CarrierConfig &carrier, const AntennaPattern &pattern)
    {
        SparsityMap map;
        map.power.setZero(Eigen::Index(users.size()), Eigen::Index(poses.size()));
        for (std::size_t k = 0; k < users.size(); ++k)
            for (std::size_t m = 0; m < poses.size(); ++m)
                map.power(Eigen::Index(k), Eigen::Index(m)) =
                    hybrid_pose_channel(poses[m], layout, users[k], carrier, pattern).squaredNorm();
        return map;
    }

    double sum_capacity(const Eigen::MatrixXcd &H, double noise_power, double tx_power)
    {
        if (!(noise_power > 0.0) || !(tx_power >= 0.0))
            throw std::invalid_argument("sum_capacity: need noise_power > 0 and tx_power >= 0");
        const double rho = tx_power / noise_power;
        Eigen::MatrixXcd G = rho * (H.adjoint() * H);
        G.diagonal().array() += 1.0;
        const Eigen::LLT<Eigen::MatrixXcd> llt(G);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("sum_capacity: Gram matrix is not positive definite");
        const Eigen::MatrixXcd L = llt.matrixL();
        return 2.0 * L.diagonal().real().array().log().sum() / std::log(2.0);
    }

    double channel_nmse(const Eigen::VectorXcd &estimate, const Eigen::VectorXcd &truth)
    {
        if (estimate.size() != truth.size())
            throw std::invalid_argument("channel_nmse: length mismatch");
        const double ref = truth.squaredNorm();
        if (ref == 0.0)
            return std::numeric_limits<double>::infinity();
        return (estimate - truth).squaredNorm() / ref;
    }

    double site_aperture(const SiteSpace &site)
    {
        return site.side_length * std::sqrt(3.0);
    }
}
