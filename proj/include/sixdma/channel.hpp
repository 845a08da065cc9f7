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

#ifndef sixdma_channel_H
#define sixdma_channel_H

#include "sixdma/geometry.hpp"

#include <Eigen/Core>
#include <span>
#include <vector>

namespace sixdma
{
    struct CarrierConfig
    {
        double frequency = 100e9;            // f_c in [Hz]
        double speed_of_light = 299792458.0; // c in [m/s]

        double wavelength() const { return speed_of_light / frequency; }
        double wavenumber() const { return 2.0 * pi / wavelength(); }
    };

    enum class ChannelModel
    {
        far,
        near,
        hybrid
    };

    const char *to_string(ChannelModel model);

    // Per-antenna path gain in the near-field model
    enum class NearFieldGain
    {
        common,          // nu_{b,n} = nu
        free_space_taper // nu_{b,n} = nu * d / dbar_{b,n}
    };

    // Channel coefficients stacked surface by surface: entry (b, n) sits at b * N + n
    struct ChannelVector
    {
        Eigen::VectorXcd coefficients;
        ChannelModel model = ChannelModel::hybrid;
        std::vector<SurfacePose> poses;
        std::size_t antennas_per_pose = 0;

        // Sub-vector of pose b
        Eigen::VectorXcd block(std::size_t b) const;
    };

    // lambda / (4 pi d) * exp(j phase)
    cdouble free_space_path_gain(double distance, const CarrierConfig &carrier, double phase = 0.0);

    // Far-field steering vector; entry n is exp(j k f^T r_{b,n}) with f pointing toward the user
    Eigen::VectorXcd steering_vector_far(const SurfacePose &pose, const ArrayLayout &layout,
                                         const DoaAngles &global_doa, const CarrierConfig &carrier);

    // Planar-wave response of one surface to a plane wave arriving from `local_direction`
    // (unit vector in the surface frame). Phases are relative to the surface center.
    Eigen::VectorXcd local_steering_vector(const ArrayLayout &layout, const Eigen::Vector3d &local_direction,
                                           double wavenumber);

    // Hybrid-field steering vector of one surface, using the surface-relative DOA of the user
    Eigen::VectorXcd steering_vector_hybrid(const SurfacePose &pose, const ArrayLayout &layout,
                                            const UserPathState &path, const CarrierConfig &carrier);

    ChannelVector channel_far(std::span<const SurfacePose> poses, const ArrayLayout &layout,
                              const UserPathState &path, const CarrierConfig &carrier,
                              const AntennaPattern &pattern);

    ChannelVector channel_near(std::span<const SurfacePose> poses, const ArrayLayout &layout,
                               const UserPathState &path, const CarrierConfig &carrier,
                               const AntennaPattern &pattern,
                               NearFieldGain gain_mode = NearFieldGain::free_space_taper);

    ChannelVector channel_hybrid(std::span<const SurfacePose> poses, const ArrayLayout &layout,
                                 const UserPathState &path, const CarrierConfig &carrier,
                                 const AntennaPattern &pattern);

    ChannelVector channel(ChannelModel model, std::span<const SurfacePose> poses, const ArrayLayout &layout,
                          const UserPathState &path, const CarrierConfig &carrier,
                          const AntennaPattern &pattern,
                          NearFieldGain gain_mode = NearFieldGain::free_space_taper);

    // Hybrid-field channel h_m of a single pose (length N)
    Eigen::VectorXcd hybrid_pose_channel(const SurfacePose &pose, const ArrayLayout &layout,
                                         const UserPathState &path, const CarrierConfig &carrier,
                                         const AntennaPattern &pattern);

    // 2 D^2 / lambda
    double rayleigh_distance(double aperture, const CarrierConfig &carrier);
}

#endif
