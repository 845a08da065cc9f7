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

#include "catch_amalgamated.hpp"
#include "sixdma/grid.hpp"

#include <algorithm>
#include <cmath>

using namespace sixdma;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    bool on_lattice(double x, double origin, double step)
    {
        const double k = (x - origin) / step;
        return std::abs(k - std::round(k)) < 1e-6;
    }
}

TEST_CASE("axis ranges include both endpoints", "[grid]")
{
    const auto v = AxisRange{20.0, 800.0, 5.0}.values();
    REQUIRE(v.size() == 157);
    CHECK(v.front() == 20.0);
    CHECK(v.back() == 800.0);

    // Rounding must not drop the last point
    const auto w = AxisRange{0.0, 1.0, 0.1}.values();
    CHECK(w.size() == 11);
    CHECK(AxisRange{0.0, 0.95, 0.1}.values().size() == 10);
    CHECK(AxisRange{3.0, 3.0, 1.0}.values() == std::vector<double>{3.0});
    CHECK_THROWS_AS((AxisRange{1.0, 0.0, 0.1}.values()), std::invalid_argument);
}

TEST_CASE("coarse grid removes the duplicated azimuth", "[grid]")
{
    GridSpec spec;
    spec.distance = {20.0, 30.0, 5.0};
    spec.azimuth = {-pi, pi, pi / 2.0};
    spec.elevation = {-0.5 * pi, 0.5 * pi, pi / 4.0};
    const auto g = make_coarse_grid(spec);
    CHECK(g.distances().size() == 3);
    CHECK(g.azimuths().size() == 4);
    CHECK(g.elevations().size() == 5);
    CHECK(g.size() == 60);
    CHECK(spec.cell_count() == 60);

    // Partial azimuth ranges keep both ends
    spec.azimuth = {-1.0, 1.0, 0.5};
    CHECK(make_coarse_grid(spec).azimuths().size() == 5);
    CHECK(spec.cell_count() == 75);
}

TEST_CASE("preset cell counts", "[grid]")
{
    CHECK(GridSpec::desk().cell_count() == make_coarse_grid(GridSpec::desk()).size());
    CHECK(GridSpec::desk().cell_count() == 1 * 120 * 61);
    GridSpec spec_default;
    CHECK(spec_default.cell_count() == 157 * 360 * 181);
    const auto paper = GridSpec::paper(CarrierConfig{});
    CHECK(paper.cell_count() > 100'000'000'000ULL);
    CHECK(FineGridSpec::desk().cell_count() == 5 * 61 * 61);
}

TEST_CASE("grid validation", "[grid]")
{
    GridSpec g;
    g.distance = {0.0, 10.0, 1.0};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.azimuth = {-4.0, 0.0, 0.1};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GridSpec{};
    g.elevation.step = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    FineGridSpec f;
    CHECK_NOTHROW(f.validate(GridSpec{}));
    f.azimuth_step = GridSpec{}.azimuth.step;
    CHECK_THROWS_AS(f.validate(GridSpec{}), std::invalid_argument);
    CHECK_NOTHROW(FineGridSpec::desk().validate(GridSpec::desk()));
    CHECK_NOTHROW(FineGridSpec::paper(CarrierConfig{}).validate(GridSpec::paper(CarrierConfig{})));
}

TEST_CASE("search grid order is distance-major, elevation fastest", "[grid]")
{
    const SearchGrid g({1.0, 2.0}, {10.0, 20.0, 30.0}, {100.0, 200.0});
    REQUIRE(g.size() == 12);
    CHECK(g.at(0) == Candidate{1.0, 10.0, 100.0});
    CHECK(g.at(1) == Candidate{1.0, 10.0, 200.0});
    CHECK(g.at(2) == Candidate{1.0, 20.0, 100.0});
    CHECK(g.at(6) == Candidate{2.0, 10.0, 100.0});
    CHECK(g.at(11) == Candidate{2.0, 30.0, 200.0});
    CHECK_THROWS_AS(g.at(12), std::out_of_range);
    CHECK(SearchGrid().empty());
}

TEST_CASE("fine windows share one global lattice", "[grid][property]")
{
    FineGridSpec f;
    f.widen_azimuth = false;
    const auto a = make_fine_grid(f, {100.03, 0.5012, 0.2007});
    const auto b = make_fine_grid(f, {100.41, 0.5204, 0.1911});
    CHECK(a.distances().size() == 101);
    CHECK(a.azimuths().size() == 41);
    CHECK(a.elevations().size() == 41);
    for (double d : a.distances())
        REQUIRE(on_lattice(d, f.distance_origin, f.distance_step));
    for (double x : b.azimuths())
        REQUIRE(on_lattice(x, f.azimuth_origin, f.azimuth_step));
    for (double x : b.elevations())
        REQUIRE(on_lattice(x, f.elevation_origin, f.elevation_step));

    // Overlapping windows produce bit-identical shared points
    std::vector<double> shared;
    std::set_intersection(a.distances().begin(), a.distances().end(), b.distances().begin(), b.distances().end(),
                          std::back_inserter(shared));
    CHECK(shared.size() == 101 - 4);

    // The center itself is a lattice point when it lies on the lattice
    const double d0 = lattice_value(f.distance_origin, f.distance_step, 777);
    const auto c = make_fine_grid(f, {d0, 0.0, 0.0});
    CHECK(c.distances()[50] == d0);
}

TEST_CASE("fine windows are clipped at the domain edges", "[grid]")
{
    FineGridSpec f;
    f.widen_azimuth = false;
    f.distance_origin = 0.05;
    const auto g = make_fine_grid(f, {0.25, 3.13, 1.56});
    CHECK(std::all_of(g.distances().begin(), g.distances().end(), [](double d) { return d > 0.0; }));
    CHECK(std::all_of(g.elevations().begin(), g.elevations().end(),
                      [](double e) { return e <= 0.5 * pi + 1e-12; }));
    CHECK(std::all_of(g.azimuths().begin(), g.azimuths().end(), [](double a) { return a >= -pi && a < pi; }));
    CHECK(g.azimuths().size() == 41);
}

TEST_CASE("azimuth span widens with elevation", "[grid]")
{
    FineGridSpec f;
    const auto low = make_fine_grid(f, {100.0, 0.3, 0.0});
    const auto high = make_fine_grid(f, {100.0, 0.3, pi / 3.0});
    CHECK(low.azimuths().size() == 41);
    CHECK(high.azimuths().size() == 81);

    // Near the pole the window covers the whole circle without duplicates
    const auto pole = make_fine_grid(f, {100.0, 0.3, 0.5 * pi - 1e-4});
    CHECK(pole.azimuths().size() == 3600);
    auto az = pole.azimuths();
    std::sort(az.begin(), az.end());
    CHECK(std::adjacent_find(az.begin(), az.end(), [](double x, double y) { return y - x < 1e-9; }) == az.end());
}

TEST_CASE("default clustering threshold", "[grid]")
{
    GridSpec g;
    g.distance = {20.0, 800.0, 5.0};
    g.azimuth.step = g.elevation.step = pi / 180.0;
    const double da = 800.0 * pi / 180.0;
    CHECK_THAT(default_cluster_threshold(g), WithinRel(2.0 * std::sqrt(25.0 + 2.0 * da * da), 1e-14));

    // A single-valued distance axis has no radial extent
    const auto desk = GridSpec::desk();
    const double db = 410.0 * pi / 60.0;
    CHECK_THAT(default_cluster_threshold(desk), WithinRel(2.0 * std::sqrt(2.0) * db, 1e-14));
}
