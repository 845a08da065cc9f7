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

#ifndef sixdma_grid_H
#define sixdma_grid_H

#include "sixdma/channel.hpp"
#include "sixdma/geometry.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace sixdma
{
    // Polar search point (d, phi, theta) relative to the BS reference point
    struct Candidate
    {
        double distance = 0.0;
        double azimuth = 0.0;
        double elevation = 0.0;

        DoaAngles doa() const { return {azimuth, elevation}; }
        bool operator==(const Candidate &) const = default;
    };

    // lo, lo + step, ..., up to hi (inclusive when hi is reached within rounding)
    struct AxisRange
    {
        double lo = 0.0;
        double hi = 0.0;
        double step = 1.0;

        std::vector<double> values() const;
    };

    // Coarse search lattice over distance, azimuth and elevation
    struct GridSpec
    {
        AxisRange distance{20.0, 800.0, 5.0};
        AxisRange azimuth{-pi, pi, pi / 180.0};
        AxisRange elevation{-0.5 * pi, 0.5 * pi, pi / 180.0};

        void validate() const;

        // Number of grid points after removing the duplicated azimuth -pi / +pi
        std::size_t cell_count() const;

        static GridSpec desk();
        static GridSpec paper(const CarrierConfig &carrier);
    };

    // Fine search lattice: a window of the given spans around a center point.
    // The center is snapped onto the lattice origin + k * step so that window points from
    // different centers share one global lattice.
    struct FineGridSpec
    {
        double distance_span = 10.0;
        double azimuth_span = 4.0 * pi / 180.0;
        double elevation_span = 4.0 * pi / 180.0;
        double distance_step = 0.1;
        double azimuth_step = pi / 1800.0;
        double elevation_step = pi / 1800.0;
        double distance_origin = 20.0;
        double azimuth_origin = -pi;
        double elevation_origin = -0.5 * pi;

        // Widen the azimuth span by 1 / cos(elevation) of the center (capped at the full circle)
        // so that the window covers a constant angular width on the sphere
        bool widen_azimuth = true;

        // Steps must be positive and strictly finer than the coarse steps
        void validate(const GridSpec &coarse) const;

        std::size_t cell_count() const;

        static FineGridSpec desk();
        static FineGridSpec paper(const CarrierConfig &carrier);
    };

    // Product grid in lexicographic order: distance major, elevation fastest
    class SearchGrid
    {
    public:
        SearchGrid() = default;
        SearchGrid(std::vector<double> distances, std::vector<double> azimuths, std::vector<double> elevations);

        std::size_t size() const { return distances_.size() * azimuths_.size() * elevations_.size(); }
        bool empty() const { return size() == 0; }
        Candidate at(std::size_t index) const;

        const std::vector<double> &distances() const { return distances_; }
        const std::vector<double> &azimuths() const { return azimuths_; }
        const std::vector<double> &elevations() const { return elevations_; }

    private:
        std::vector<double> distances_, azimuths_, elevations_;
    };

    SearchGrid make_coarse_grid(const GridSpec &spec);

    // Window around `center`; points with d <= 0 or elevation outside [-pi/2, pi/2] are dropped and
    // azimuths are wrapped to [-pi, pi)
    SearchGrid make_fine_grid(const FineGridSpec &spec, const Candidate &center);

    // Lattice point origin + k * step, computed the same way make_fine_grid does
    double lattice_value(double origin, double step, long long k);

    // Default clustering threshold: twice the diagonal of a coarse grid cell at D_max.
    // The radial extent is 0 when the distance axis holds a single value.
    double default_cluster_threshold(const GridSpec &coarse);

    // Grids above this size need an explicit opt-in from the caller
    inline constexpr std::size_t huge_grid_threshold = 50'000'000;
}

#endif
