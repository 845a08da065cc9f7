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

#include "sixdma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sixdma
{
    std::vector<double> AxisRange::values() const
    {
        if (!(step > 0.0) || !(hi >= lo))
            throw std::invalid_argument("AxisRange: need step > 0 and hi >= lo");
        const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
        std::vector<double> v;
        v.reserve(std::size_t(count));
        for (long long i = 0; i < count; ++i)
            v.push_back(lattice_value(lo, step, i));
        return v;
    }

    double lattice_value(double origin, double step, long long k)
    {
        return origin + double(k) * step;
    }

    namespace
    {
        std::vector<double> azimuth_values(const AxisRange &range)
        {
            auto v = range.values();
            // -pi and +pi describe the same direction
            if (v.size() > 1 && std::abs(v.back() - v.front() - 2.0 * pi) < 1e-9)
                v.pop_back();
            return v;
        }

        void check_axis(const AxisRange &a, const char *name)
        {
            if (!(a.step > 0.0) || !(a.hi >= a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi))
                throw std::invalid_argument(std::string("GridSpec: invalid ") + name + " axis");
        }
    }

    void GridSpec::validate() const
    {
        check_axis(distance, "distance");
        check_axis(azimuth, "azimuth");
        check_axis(elevation, "elevation");
        if (!(distance.lo > 0.0))
            throw std::invalid_argument("GridSpec: distance range must be positive");
        if (azimuth.lo < -pi - 1e-12 || azimuth.hi > pi + 1e-12)
            throw std::invalid_argument("GridSpec: azimuth range must lie in [-pi, pi]");
        if (elevation.lo < -0.5 * pi - 1e-12 || elevation.hi > 0.5 * pi + 1e-12)
            throw std::invalid_argument("GridSpec: elevation range must lie in [-pi/2, pi/2]");
    }

    std::size_t GridSpec::cell_count() const
    {
        // Counts without materializing the axes
        auto count = [](const AxisRange &a)
        { return std::size_t(std::floor((a.hi - a.lo) / a.step + 1e-9)) + 1; };
        std::size_t n_az = count(azimuth);
        if (n_az > 1 && std::abs(azimuth.lo + double(n_az - 1) * azimuth.step - azimuth.lo - 2.0 * pi) < 1e-9)
            --n_az;
        return count(distance) * n_az * count(elevation);
    }

    GridSpec GridSpec::desk()
    {
        // One distance at mid-range: a single pose cannot resolve distance, so extra values
        // only spread the Cartesian estimates along the ray
        GridSpec g;
        g.distance = {410.0, 410.0, 780.0};
        g.azimuth = {-pi, pi, pi / 60.0};
        g.elevation = {-0.5 * pi, 0.5 * pi, pi / 60.0};
        return g;
    }

    GridSpec GridSpec::paper(const CarrierConfig &carrier)
    {
        GridSpec g;
        g.distance = {20.0, 800.0, carrier.wavelength()};
        g.azimuth = {-pi, pi, pi / 1000.0};
        g.elevation = {-0.5 * pi, 0.5 * pi, pi / 1000.0};
        return g;
    }

    void FineGridSpec::validate(const GridSpec &coarse) const
    {
        if (!(distance_step > 0.0) || !(azimuth_step > 0.0) || !(elevation_step > 0.0))
            throw std::invalid_argument("FineGridSpec: steps must be positive");
        if (!(distance_span >= 0.0) || !(azimuth_span >= 0.0) || !(elevation_span >= 0.0))
            throw std::invalid_argument("FineGridSpec: spans must be non-negative");
        if (!(distance_step < coarse.distance.step) || !(azimuth_step < coarse.azimuth.step) ||
            !(elevation_step < coarse.elevation.step))
            throw std::invalid_argument("FineGridSpec: fine steps must be strictly smaller than the coarse steps");
    }

    std::size_t FineGridSpec::cell_count() const
    {
        auto count = [](double span, double step)
        { return 2 * std::size_t(std::floor(0.5 * span / step + 1e-9)) + 1; };
        return count(distance_span, distance_step) * count(azimuth_span, azimuth_step) *
               count(elevation_span, elevation_step);
    }

    FineGridSpec FineGridSpec::desk()
    {
        FineGridSpec f;
        f.distance_span = 780.0;
        f.distance_step = 195.0;
        f.azimuth_span = f.elevation_span = pi / 30.0;
        f.azimuth_step = f.elevation_step = pi / 1800.0;
        f.distance_origin = 410.0;
        return f;
    }

    FineGridSpec FineGridSpec::paper(const CarrierConfig &carrier)
    {
        const double lambda = carrier.wavelength();
        FineGridSpec f;
        f.distance_span = 2.0 * lambda;
        f.azimuth_span = 4.0 * pi / 1000.0;
        f.elevation_span = 4.0 * pi / 1000.0;
        f.distance_step = 0.025 * lambda;
        f.azimuth_step = pi / 5000.0;
        f.elevation_step = pi / 5000.0;
        return f;
    }

    SearchGrid::SearchGrid(std::vector<double> distances, std::vector<double> azimuths, std::vector<double> elevations)
        : distances_(std::move(distances)), azimuths_(std::move(azimuths)), elevations_(std::move(elevations))
    {
    }

    Candidate SearchGrid::at(std::size_t index) const
    {
        if (index >= size())
            throw std::out_of_range("SearchGrid: index out of range");
        const std::size_t n_el = elevations_.size(), n_az = azimuths_.size();
        const std::size_t i_el = index % n_el;
        const std::size_t i_az = (index / n_el) % n_az;
        const std::size_t i_d = index / (n_el * n_az);
        return {distances_[i_d], azimuths_[i_az], elevations_[i_el]};
    }

    SearchGrid make_coarse_grid(const GridSpec &spec)
    {
        spec.validate();
        return SearchGrid(spec.distance.values(), azimuth_values(spec.azimuth), spec.elevation.values());
    }

    SearchGrid make_fine_grid(const FineGridSpec &spec, const Candidate &center)
    {
        auto axis = [](double origin, double step, double span, double c, auto keep, auto map)
        {
            const auto k_center = static_cast<long long>(std::llround((c - origin) / step));
            const auto half = static_cast<long long>(std::floor(0.5 * span / step + 1e-9));
            std::vector<double> v;
            for (long long i = -half; i <= half; ++i)
            {
                const double x = map(lattice_value(origin, step, k_center + i));
                if (keep(x))
                    v.push_back(x);
            }
            return v;
        };
        auto identity = [](double x)
        { return x; };
        auto wrap = [](double x)
        { return (x < -pi || x >= pi) ? wrap_pi(x) : x; };

        auto d = axis(spec.distance_origin, spec.distance_step, spec.distance_span, center.distance,
                      [](double x)
                      { return x > 0.0; },
                      identity);
        double az_span = spec.azimuth_span;
        if (spec.widen_azimuth)
        {
            const double c = std::cos(center.elevation);
            az_span = (c * 2.0 * pi > az_span) ? az_span / c : 2.0 * pi;
        }
        auto az = axis(spec.azimuth_origin, spec.azimuth_step, az_span, center.azimuth,
                       [](double)
                       { return true; },
                       wrap);
        // A window wider than the circle wraps onto itself
        if (az_span + spec.azimuth_step > 2.0 * pi)
        {
            std::vector<double> unique;
            for (double x : az)
                if (std::none_of(unique.begin(), unique.end(), [&](double u)
                                 { return std::abs(wrap_pi(x - u)) < 1e-9; }))
                    unique.push_back(x);
            az = std::move(unique);
        }
        auto el = axis(spec.elevation_origin, spec.elevation_step, spec.elevation_span, center.elevation,
                       [](double x)
                       { return x >= -0.5 * pi - 1e-12 && x <= 0.5 * pi + 1e-12; },
                       identity);
        return SearchGrid(std::move(d), std::move(az), std::move(el));
    }

    double default_cluster_threshold(const GridSpec &coarse)
    {
        // A single-valued distance axis has no radial extent
        const bool single = std::floor((coarse.distance.hi - coarse.distance.lo) / coarse.distance.step + 1e-9) < 1.0;
        const double r = coarse.distance.hi;
        const double dd = single ? 0.0 : coarse.distance.step;
        const double da = r * coarse.azimuth.step;
        const double de = r * coarse.elevation.step;
        return 2.0 * std::sqrt(dd * dd + da * da + de * de);
    }
}
