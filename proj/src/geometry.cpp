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

#include "sixdma/geometry.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sixdma
{
    double wrap_two_pi(double angle)
    {
        double w = std::fmod(angle, 2.0 * pi);
        if (w < 0.0)
            w += 2.0 * pi;
        if (w >= 2.0 * pi) // fmod rounding for tiny negative inputs
            w = 0.0;
        return w;
    }

    double wrap_pi(double angle)
    {
        double w = wrap_two_pi(angle + pi) - pi;
        return w;
    }

    bool SiteSpace::contains(const Eigen::Vector3d &position, double tolerance) const
    {
        const double half = 0.5 * side_length + tolerance;
        return ((position - center).array().abs() <= half).all();
    }

    SurfacePose::SurfacePose(const Eigen::Vector3d &position, const Eigen::Vector3d &rotation)
        : position_(position),
          rotation_(wrap_two_pi(rotation(0)), wrap_two_pi(rotation(1)), wrap_two_pi(rotation(2)))
    {
        if (!position.allFinite() || !rotation.allFinite())
            throw std::invalid_argument("SurfacePose: position and rotation must be finite");
    }

    void SurfacePose::validate(const SiteSpace &site) const
    {
        if (!site.contains(position_))
            throw std::invalid_argument("SurfacePose: position lies outside the site space");
    }

    Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d &rotation)
    {
        const double ca = std::cos(rotation(0)), sa = std::sin(rotation(0));
        const double cb = std::cos(rotation(1)), sb = std::sin(rotation(1));
        const double cg = std::cos(rotation(2)), sg = std::sin(rotation(2));

        Eigen::Matrix3d R;
        R << cb * cg, cb * sg, -sb,
            sb * sa * cg - ca * sg, sb * sa * sg + ca * cg, cb * sa,
            ca * sb * cg + sa * sg, ca * sb * sg - sa * cg, ca * cb;
        return R;
    }

    bool is_proper_rotation(const Eigen::Matrix3d &R, double tolerance)
    {
        if (!R.allFinite())
            return false;
        const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
        return ortho <= tolerance && std::abs(R.determinant() - 1.0) <= tolerance;
    }

    ArrayLayout ArrayLayout::upa(std::size_t n_rows, std::size_t n_cols, double spacing)
    {
        if (n_rows == 0 || n_cols == 0)
            throw std::invalid_argument("ArrayLayout: at least one antenna is required");
        if (!(spacing > 0.0))
            throw std::invalid_argument("ArrayLayout: spacing must be positive");

        ArrayLayout layout;
        layout.spacing = spacing;
        layout.n_rows = n_rows;
        layout.n_cols = n_cols;
        layout.positions.reserve(n_rows * n_cols);

        const double y0 = 0.5 * double(n_cols - 1), z0 = 0.5 * double(n_rows - 1);
        for (std::size_t r = 0; r < n_rows; ++r)
            for (std::size_t c = 0; c < n_cols; ++c)
                layout.positions.emplace_back(0.0, (double(c) - y0) * spacing, (double(r) - z0) * spacing);
        return layout;
    }

    ArrayLayout ArrayLayout::upa(std::size_t n_elements, double spacing)
    {
        if (n_elements == 0)
            throw std::invalid_argument("ArrayLayout: at least one antenna is required");
        std::size_t rows = std::size_t(std::sqrt(double(n_elements)));
        while (rows > 1 && n_elements % rows != 0)
            --rows;
        return upa(rows, n_elements / rows, spacing);
    }

    Eigen::Vector3d global_antenna_position(const SurfacePose &pose, const ArrayLayout &layout, std::size_t n)
    {
        if (n >= layout.size())
            throw std::out_of_range("global_antenna_position: antenna index " + std::to_string(n) +
                                    " out of range (N = " + std::to_string(layout.size()) + ")");
        return pose.position() + rotation_matrix(pose.rotation()) * layout.positions[n];
    }

    Eigen::Vector3d doa_unit_vector(const DoaAngles &angles)
    {
        const double ct = std::cos(angles.elevation);
        return {ct * std::cos(angles.azimuth), ct * std::sin(angles.azimuth), std::sin(angles.elevation)};
    }

    DoaAngles angles_from_unit_vector(const Eigen::Vector3d &v)
    {
        const double norm = v.norm();
        if (!(std::abs(norm - 1.0) <= 1e-9))
            throw std::invalid_argument("angles_from_unit_vector: input is not a unit vector");

        DoaAngles a;
        const double horizontal = std::hypot(v(0), v(1));
        a.elevation = std::atan2(v(2), horizontal);
        a.azimuth = horizontal < 1e-12 ? 0.0 : std::atan2(v(1), v(0));
        return a;
    }

    DoaAngles project_to_local_frame(const Eigen::Vector3d &global_doa, const Eigen::Vector3d &rotation)
    {
        const Eigen::Vector3d local = rotation_matrix(rotation).transpose() * global_doa;
        return angles_from_unit_vector(local);
    }

    // ---- AntennaPattern ----

    AntennaPattern AntennaPattern::directive(double max_gain_dbi, double theta_3db, double phi_3db,
                                             double side_lobe_limit_db, double max_attenuation_db)
    {
        if (!(theta_3db > 0.0) || !(phi_3db > 0.0))
            throw std::invalid_argument("AntennaPattern: beamwidths must be positive");
        if (!(side_lobe_limit_db >= 0.0) || !(max_attenuation_db >= 0.0))
            throw std::invalid_argument("AntennaPattern: attenuation limits must be non-negative");
        AntennaPattern p;
        p.kind_ = Kind::directive;
        p.max_gain_dbi_ = max_gain_dbi;
        p.theta_3db_ = theta_3db;
        p.phi_3db_ = phi_3db;
        p.side_lobe_limit_db_ = side_lobe_limit_db;
        p.max_attenuation_db_ = max_attenuation_db;
        return p;
    }

    AntennaPattern AntennaPattern::isotropic()
    {
        return AntennaPattern{};
    }

    AntennaPattern &AntennaPattern::set_sparsity_floor(double floor_dbi)
    {
        sparsity_floor_dbi_ = floor_dbi;
        return *this;
    }

    double AntennaPattern::gain_dbi(const DoaAngles &local) const
    {
        if (kind_ == Kind::isotropic)
            return 0.0;
        const double rt = local.elevation / theta_3db_, rp = local.azimuth / phi_3db_;
        const double a_v = std::min(12.0 * rt * rt, side_lobe_limit_db_);
        const double a_h = std::min(12.0 * rp * rp, max_attenuation_db_);
        return max_gain_dbi_ - std::min(a_v + a_h, max_attenuation_db_);
    }

    double AntennaPattern::linear_gain(const DoaAngles &local) const
    {
        if (std::abs(local.azimuth) > 0.5 * pi)
            return 0.0;
        const double a = gain_dbi(local);
        if (a <= sparsity_floor_dbi_)
            return 0.0;
        return std::pow(10.0, 0.1 * a);
    }

    double AntennaPattern::linear_gain(const Eigen::Vector3d &local_direction) const
    {
        if (local_direction(0) < 0.0)
            return 0.0;
        if (kind_ == Kind::isotropic && sparsity_floor_dbi_ < 0.0)
            return 1.0;
        const double horizontal = std::hypot(local_direction(0), local_direction(1));
        DoaAngles local;
        local.elevation = std::atan2(local_direction(2), horizontal);
        local.azimuth = horizontal < 1e-12 ? 0.0 : std::atan2(local_direction(1), local_direction(0));
        return linear_gain(local);
    }

    bool AntennaPattern::visible(const Eigen::Vector3d &local_direction) const
    {
        if (local_direction(0) < 0.0)
            return false;
        if (sparsity_floor_dbi_ == -std::numeric_limits<double>::infinity())
            return true;
        return linear_gain(local_direction) > 0.0;
    }

    double effective_gain_linear(const AntennaPattern &pattern, const DoaAngles &local)
    {
        return pattern.linear_gain(local);
    }

    // ---- User geometry ----

    Eigen::Vector3d user_position(double distance, const DoaAngles &doa)
    {
        if (!(distance > 0.0))
            throw std::invalid_argument("user_position: distance must be positive");
        return distance * doa_unit_vector(doa);
    }

    Eigen::Vector3d user_position(const UserPathState &path)
    {
        return user_position(path.distance, path.doa);
    }

    SurfaceRelative surface_relative_params(const Eigen::Vector3d &user_pos, const SurfacePose &pose)
    {
        const Eigen::Vector3d offset = user_pos - pose.position();
        SurfaceRelative s;
        s.distance = offset.norm();
        if (!(s.distance > 0.0))
            throw std::invalid_argument("surface_relative_params: user coincides with the surface center");
        s.direction = offset / s.distance;
        s.global_doa = angles_from_unit_vector(s.direction);
        s.local_doa = angles_from_unit_vector(rotation_matrix(pose.rotation()).transpose() * s.direction);
        return s;
    }
}
