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

#ifndef sixdma_geometry_H
#define sixdma_geometry_H

#include <Eigen/Core>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

namespace sixdma
{
    inline constexpr double pi = std::numbers::pi;
    using cdouble = std::complex<double>;

    // Maps an angle to [0, 2pi)
    double wrap_two_pi(double angle);

    // Maps an angle to [-pi, pi]; +pi is folded onto -pi
    double wrap_pi(double angle);

    // Axis-aligned cube that bounds all surface positions
    struct SiteSpace
    {
        double side_length = 0.5;                           // Cube edge length in [m]
        Eigen::Vector3d center = Eigen::Vector3d::Zero(); // Cube center in global coordinates

        bool contains(const Eigen::Vector3d &position, double tolerance = 1e-12) const;
    };

    // Position q [m] and rotation u = (alpha, beta, gamma) [rad] of one surface.
    // Rotation angles are kept wrapped to [0, 2pi).
    class SurfacePose
    {
    public:
        SurfacePose() = default;
        SurfacePose(const Eigen::Vector3d &position, const Eigen::Vector3d &rotation);

        const Eigen::Vector3d &position() const { return position_; }
        const Eigen::Vector3d &rotation() const { return rotation_; }

        // Throws std::invalid_argument if the position lies outside the site space
        void validate(const SiteSpace &site) const;

    private:
        Eigen::Vector3d position_ = Eigen::Vector3d::Zero();
        Eigen::Vector3d rotation_ = Eigen::Vector3d::Zero();
    };

    // Rotation matrix R(u) mapping local surface coordinates to global coordinates
    //
    //     | cb*cg              cb*sg              -sb   |
    // R = | sb*sa*cg - ca*sg   sb*sa*sg + ca*cg   cb*sa |
    //     | ca*sb*cg + sa*sg   ca*sb*sg - sa*cg   ca*cb |
    //
    Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d &rotation);

    // True if R^T R = I and det R = +1 within the tolerance
    bool is_proper_rotation(const Eigen::Matrix3d &R, double tolerance = 1e-12);

    // Antenna positions of one surface in its local frame.
    // The array lies in the local y'-z' plane; the local x'-axis is the boresight.
    struct ArrayLayout
    {
        std::vector<Eigen::Vector3d> positions; // Local positions r_n in [m], centered at the origin
        double spacing = 0.0;                   // Element spacing in [m]
        std::size_t n_rows = 0;                 // Elements along z'
        std::size_t n_cols = 0;                 // Elements along y'

        std::size_t size() const { return positions.size(); }

        // Uniform planar array with n_rows x n_cols elements
        static ArrayLayout upa(std::size_t n_rows, std::size_t n_cols, double spacing);

        // Uniform planar array with n_elements, using the most square factorization
        static ArrayLayout upa(std::size_t n_elements, double spacing);
    };

    // Global position r_{b,n} = q_b + R(u_b) r_n of antenna n (0-based)
    Eigen::Vector3d global_antenna_position(const SurfacePose &pose, const ArrayLayout &layout, std::size_t n);

    struct DoaAngles
    {
        double azimuth = 0.0;   // phi in [-pi, pi]
        double elevation = 0.0; // theta in [-pi/2, pi/2]
    };

    // [cos(theta) cos(phi), cos(theta) sin(phi), sin(theta)]
    Eigen::Vector3d doa_unit_vector(const DoaAngles &angles);

    // Inverse of doa_unit_vector. Azimuth is 0 at the poles.
    // Throws std::invalid_argument if |v| deviates from 1 by more than 1e-9.
    DoaAngles angles_from_unit_vector(const Eigen::Vector3d &v);

    // Angles of R(u)^T f in the local frame of a surface with rotation u
    DoaAngles project_to_local_frame(const Eigen::Vector3d &global_doa, const Eigen::Vector3d &rotation);

    // Single-element radiation pattern A(theta', phi') in dBi, evaluated in the local frame.
    //
    // The directive pattern follows the 3GPP single-element model
    //     A = G_max - min( A_V + A_H, A_m )
    //     A_V = min( 12 (theta'/theta_3dB)^2, SLA_v ),  A_H = min( 12 (phi'/phi_3dB)^2, A_m )
    // The linear gain is forced to exactly 0 behind the surface (|phi'| > pi/2) and, when a
    // sparsity floor is configured, wherever A drops to or below that floor.
    class AntennaPattern
    {
    public:
        enum class Kind
        {
            isotropic,
            directive
        };

        // 3GPP-style defaults: 8 dBi, 65 deg beamwidths, 30 dB limits
        static AntennaPattern directive(double max_gain_dbi = 8.0,
                                        double theta_3db = 65.0 * pi / 180.0,
                                        double phi_3db = 65.0 * pi / 180.0,
                                        double side_lobe_limit_db = 30.0,
                                        double max_attenuation_db = 30.0);

        // A = 0 dBi in the front half-space
        static AntennaPattern isotropic();

        AntennaPattern &set_sparsity_floor(double floor_dbi);

        Kind kind() const { return kind_; }
        double max_gain_dbi() const { return max_gain_dbi_; }
        double theta_3db() const { return theta_3db_; }
        double phi_3db() const { return phi_3db_; }
        double side_lobe_limit_db() const { return side_lobe_limit_db_; }
        double max_attenuation_db() const { return max_attenuation_db_; }
        double sparsity_floor_dbi() const { return sparsity_floor_dbi_; }

        // Pattern value in dBi (no half-space clamp)
        double gain_dbi(const DoaAngles &local) const;

        // 10^(A/10), or 0 on the dark side
        double linear_gain(const DoaAngles &local) const;

        // Same as linear_gain, for a unit direction already expressed in the local frame
        double linear_gain(const Eigen::Vector3d &local_direction) const;

        // linear_gain(local_direction) > 0, without evaluating the pattern when no floor is set
        bool visible(const Eigen::Vector3d &local_direction) const;

    private:
        Kind kind_ = Kind::isotropic;
        double max_gain_dbi_ = 0.0;
        double theta_3db_ = 65.0 * pi / 180.0;
        double phi_3db_ = 65.0 * pi / 180.0;
        double side_lobe_limit_db_ = 30.0;
        double max_attenuation_db_ = 30.0;
        double sparsity_floor_dbi_ = -std::numeric_limits<double>::infinity();
    };

    double effective_gain_linear(const AntennaPattern &pattern, const DoaAngles &local);

    // Ground truth or estimate of one user's LoS path, relative to the BS reference point
    struct UserPathState
    {
        double distance = 1.0; // d in [m]
        DoaAngles doa;         // global azimuth and elevation
        cdouble path_gain{};   // nu (linear)
    };

    // d * f(theta, phi). Throws std::invalid_argument for d <= 0.
    Eigen::Vector3d user_position(const UserPathState &path);
    Eigen::Vector3d user_position(double distance, const DoaAngles &doa);

    // Geometry of a user position relative to one surface center
    struct SurfaceRelative
    {
        double distance = 0.0;                               // d_b in [m]
        Eigen::Vector3d direction = Eigen::Vector3d::Zero(); // unit vector from surface center toward the user
        DoaAngles global_doa;                                // angles of `direction`
        DoaAngles local_doa;                                 // angles of `direction` in the surface frame
    };

    // Throws std::invalid_argument if the user coincides with the surface center
    SurfaceRelative surface_relative_params(const Eigen::Vector3d &user_pos, const SurfacePose &pose);
}

#endif
