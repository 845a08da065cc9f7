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

#include "sixdma/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace sixdma
{
    namespace
    {
        struct PointRelative
        {
            double distance;
            Eigen::Vector3d direction; // unit vector toward the user
        };

        // Geometry of the user seen from `point`. At the BS reference point the path
        // parameters are used as-is, so models that coincide there agree bit-exactly.
        PointRelative relative_to_point(const UserPathState &path, const Eigen::Vector3d &user_pos,
                                        const Eigen::Vector3d &point)
        {
            if (point.isZero(0.0))
                return {path.distance, doa_unit_vector(path.doa)};
            const Eigen::Vector3d offset = user_pos - point;
            const double d = offset.norm();
            if (!(d > 0.0))
                throw std::invalid_argument("channel: user coincides with an antenna or surface center");
            return {d, offset / d};
        }

        ChannelVector make_channel(ChannelModel model, std::span<const SurfacePose> poses, const ArrayLayout &layout)
        {
            if (poses.empty())
                throw std::invalid_argument("channel: at least one pose is required");
            ChannelVector h;
            h.model = model;
            h.poses.assign(poses.begin(), poses.end());
            h.antennas_per_pose = layout.size();
            h.coefficients.setZero(Eigen::Index(poses.size() * layout.size()));
            return h;
        }
    }

    const char *to_string(ChannelModel model)
    {
        switch (model)
        {
        case ChannelModel::far:
            return "far";
        case ChannelModel::near:
            return "near";
        case ChannelModel::hybrid:
            return "hybrid";
        }
        return "unknown";
    }

    Eigen::VectorXcd ChannelVector::block(std::size_t b) const
    {
        const auto n = Eigen::Index(antennas_per_pose);
        return coefficients.segment(Eigen::Index(b) * n, n);
    }

    cdouble free_space_path_gain(double distance, const CarrierConfig &carrier, double phase)
    {
        if (!(distance > 0.0))
            throw std::invalid_argument("free_space_path_gain: distance must be positive");
        return std::polar(carrier.wavelength() / (4.0 * pi * distance), phase);
    }

    Eigen::VectorXcd local_steering_vector(const ArrayLayout &layout, const Eigen::Vector3d &local_direction,
                                           double wavenumber)
    {
        Eigen::VectorXcd a(Eigen::Index(layout.size()));
        for (std::size_t n = 0; n < layout.size(); ++n)
            a(Eigen::Index(n)) = std::polar(1.0, wavenumber * local_direction.dot(layout.positions[n]));
        return a;
    }

    Eigen::VectorXcd steering_vector_far(const SurfacePose &pose, const ArrayLayout &layout,
                                         const DoaAngles &global_doa, const CarrierConfig &carrier)
    {
        const Eigen::Vector3d f = doa_unit_vector(global_doa);
        const Eigen::Vector3d local = rotation_matrix(pose.rotation()).transpose() * f;
        const double k = carrier.wavenumber();
        const double center = f.dot(pose.position());

        Eigen::VectorXcd a(Eigen::Index(layout.size()));
        for (std::size_t n = 0; n < layout.size(); ++n)
            a(Eigen::Index(n)) = std::polar(1.0, k * (center + local.dot(layout.positions[n])));
        return a;
    }

    Eigen::VectorXcd steering_vector_hybrid(const SurfacePose &pose, const ArrayLayout &layout,
                                            const UserPathState &path, const CarrierConfig &carrier)
    {
        const auto rel = relative_to_point(path, user_position(path), pose.position());
        const Eigen::Vector3d local = rotation_matrix(pose.rotation()).transpose() * rel.direction;
        return local_steering_vector(layout, local, carrier.wavenumber());
    }

    ChannelVector channel_far(std::span<const SurfacePose> poses, const ArrayLayout &layout,
                              const UserPathState &path, const CarrierConfig &carrier,
                              const AntennaPattern &pattern)
    {
        ChannelVector h = make_channel(ChannelModel::far, poses, layout);
        const auto N = Eigen::Index(layout.size());
        const Eigen::Vector3d f = doa_unit_vector(path.doa);
        const double k = carrier.wavenumber();

        for (std::size_t b = 0; b < poses.size(); ++b)
        {
            const Eigen::Vector3d local = rotation_matrix(poses[b].rotation()).transpose() * f;
            const double g = pattern.linear_gain(local);
            if (g == 0.0)
                continue;
            const cdouble coef = path.path_gain * std::polar(std::sqrt(g), -k * path.distance);
            h.coefficients.segment(Eigen::Index(b) * N, N) =
                coef * steering_vector_far(poses[b], layout, path.doa, carrier);
        }
        return h;
    }

    ChannelVector channel_near(std::span<const SurfacePose> poses, const ArrayLayout &layout,
                               const UserPathState &path, const CarrierConfig &carrier,
                               const AntennaPattern &pattern, NearFieldGain gain_mode)
    {
        ChannelVector h = make_channel(ChannelModel::near, poses, layout);
        const auto N = Eigen::Index(layout.size());
        const Eigen::Vector3d p = user_position(path);
        const double k = carrier.wavenumber();

        for (std::size_t b = 0; b < poses.size(); ++b)
        {
            const Eigen::Matrix3d R = rotation_matrix(poses[b].rotation());
            for (Eigen::Index n = 0; n < N; ++n)
            {
                const Eigen::Vector3d r = poses[b].position() + R * layout.positions[std::size_t(n)];
                const auto rel = relative_to_point(path, p, r);
                const double g = pattern.linear_gain(Eigen::Vector3d(R.transpose() * rel.direction));
                if (g == 0.0)
                    continue;
                const cdouble nu = gain_mode == NearFieldGain::common
                                       ? path.path_gain
                                       : path.path_gain * (path.distance / rel.distance);
                h.coefficients(Eigen::Index(b) * N + n) = nu * std::polar(std::sqrt(g), -k * rel.distance);
            }
        }
        return h;
    }

    Eigen::VectorXcd hybrid_pose_channel(const SurfacePose &pose, const ArrayLayout &layout,
                                         const UserPathState &path, const CarrierConfig &carrier,
                                         const AntennaPattern &pattern)
    {
        const auto rel = relative_to_point(path, user_position(path), pose.position());
        const Eigen::Vector3d local = rotation_matrix(pose.rotation()).transpose() * rel.direction;
        const double g = pattern.linear_gain(local);
        if (g == 0.0)
            return Eigen::VectorXcd::Zero(Eigen::Index(layout.size()));
        const double k = carrier.wavenumber();
        const cdouble coef = path.path_gain * std::polar(std::sqrt(g), -k * rel.distance);
        return coef * local_steering_vector(layout, local, k);
    }

    ChannelVector channel_hybrid(std::span<const SurfacePose> poses, const ArrayLayout &layout,
                                 const UserPathState &path, const CarrierConfig &carrier,
                                 const AntennaPattern &pattern)
    {
        ChannelVector h = make_channel(ChannelModel::hybrid, poses, layout);
        const auto N = Eigen::Index(layout.size());
        for (std::size_t b = 0; b < poses.size(); ++b)
            h.coefficients.segment(Eigen::Index(b) * N, N) = hybrid_pose_channel(poses[b], layout, path, carrier, pattern);
        return h;
    }

    ChannelVector channel(ChannelModel model, std::span<const SurfacePose> poses, const ArrayLayout &layout,
                          const UserPathState &path, const CarrierConfig &carrier,
                          const AntennaPattern &pattern, NearFieldGain gain_mode)
    {
        switch (model)
        {
        case ChannelModel::far:
            return channel_far(poses, layout, path, carrier, pattern);
        case ChannelModel::near:
            return channel_near(poses, layout, path, carrier, pattern, gain_mode);
        case ChannelModel::hybrid:
            break;
        }
        return channel_hybrid(poses, layout, path, carrier, pattern);
    }

    double rayleigh_distance(double aperture, const CarrierConfig &carrier)
    {
        if (!(aperture >= 0.0))
            throw std::invalid_argument("rayleigh_distance: aperture must be non-negative");
        return 2.0 * aperture * aperture / carrier.wavelength();
    }
}
