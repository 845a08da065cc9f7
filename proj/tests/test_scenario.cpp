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
#include "sixdma/scenario.hpp"

#include <cmath>
#include <random>

using namespace sixdma;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Fibonacci poses match reference", "[scenario]")
{
    // Reference: tests/oracle/reference_values.py
    const double ref[5][3] = {{0.15, 0.0, 0.2},
                              {-0.1689524349449282, 0.15477427023307139, 0.1},
                              {0.021856431179239969, -0.24904276021620694, 0.0},
                              {0.13941085680941756, 0.18183677571840104, -0.1},
                              {-0.14770702279731426, -0.02612729255689674, -0.2}};
    const auto poses = place_candidate_poses(5, SiteSpace{});
    REQUIRE(poses.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (int c = 0; c < 3; ++c)
            CHECK_THAT(poses[i].position()(c), WithinAbs(ref[i][c], 1e-15));
}

TEST_CASE("candidate poses face outward and stay in the site", "[scenario][property]")
{
    SiteSpace site;
    site.center = {1.0, -2.0, 0.5};
    for (std::size_t M : {1u, 2u, 7u, 32u, 64u})
    {
        const auto poses = place_candidate_poses(M, site);
        REQUIRE(poses.size() == M);
        for (const auto &p : poses)
        {
            CHECK_NOTHROW(p.validate(site));
            const Eigen::Vector3d n = (p.position() - site.center) / 0.25;
            CHECK_THAT(n.norm(), WithinAbs(1.0, 1e-12));
            const Eigen::Vector3d boresight = rotation_matrix(p.rotation()) * Eigen::Vector3d::UnitX();
            CHECK((boresight - n).norm() < 1e-12);
            CHECK(p.rotation()(0) == 0.0);
        }
    }
    CHECK((place_candidate_poses(1, SiteSpace{})[0].position() - Eigen::Vector3d(0, 0, 0.25)).norm() == 0.0);
    CHECK_THROWS_AS(place_candidate_poses(0, site), std::invalid_argument);
}

TEST_CASE("outward rotation maps the boresight onto the normal", "[scenario][property]")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 1000; ++i)
    {
        const Eigen::Vector3d n = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
        const Eigen::Matrix3d R = rotation_matrix(outward_rotation(n));
        CHECK((R.col(0) - n).norm() < 1e-12);
    }
    const std::vector<Eigen::Vector3d> axes{{0, 0, 1}, {0, 0, -1}, {0, 1, 0}, {-1, 0, 0}};
    for (const auto &n : axes)
        CHECK((rotation_matrix(outward_rotation(n)).col(0) - n).norm() < 1e-12);
}

TEST_CASE("random sphere poses", "[scenario]")
{
    const auto a = random_sphere_poses(50, SiteSpace{}, 3);
    const auto b = random_sphere_poses(50, SiteSpace{}, 3);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].position() == b[i].position());
        CHECK_THAT(a[i].position().norm(), WithinAbs(0.25, 1e-12));
        CHECK((rotation_matrix(a[i].rotation()).col(0) - a[i].position() / 0.25).norm() < 1e-12);
    }
}

TEST_CASE("users stay inside the region", "[scenario][property]")
{
    const CarrierConfig carrier;
    UserRegion region;
    const auto users = sample_users(5000, region, carrier, 11);
    std::size_t beyond_median = 0;
    const double median = std::cbrt(0.5 * (std::pow(20.0, 3) + std::pow(800.0, 3)));
    for (const auto &u : users)
    {
        CHECK(u.distance >= 20.0);
        CHECK(u.distance <= 800.0);
        CHECK(u.doa.elevation >= 0.0);
        CHECK(u.doa.elevation <= 0.5 * pi);
        CHECK(std::abs(u.doa.azimuth) <= pi);
        CHECK(u.path_gain == free_space_path_gain(u.distance, carrier));
        beyond_median += u.distance > median;
    }
    // Uniform in volume: half the users lie beyond the volume median
    CHECK_THAT(double(beyond_median) / 5000.0, WithinAbs(0.5, 0.03));

    region.upper_half_space = false;
    std::size_t below = 0;
    for (const auto &u : sample_users(2000, region, carrier, 12))
        below += u.doa.elevation < 0.0;
    CHECK(below > 800);
    CHECK(below < 1200);

    region.distance_min = 0.0;
    CHECK_THROWS_AS(sample_users(1, region, carrier, 1), std::invalid_argument);

    const auto single = sample_user_at_distance(123.0, UserRegion{}, carrier, 5);
    CHECK(single.distance == 123.0);
    CHECK(single.doa.elevation >= 0.0);
}

TEST_CASE("sparsity map marks poses facing away as dark", "[scenario]")
{
    const CarrierConfig carrier;
    const auto layout = ArrayLayout::upa(16, 0.5 * carrier.wavelength());
    const auto poses = place_candidate_poses(32, SiteSpace{});
    const auto users = sample_users(20, UserRegion{}, carrier, 13);
    const auto map = sparsity_map(users, poses, layout, carrier, AntennaPattern::directive());
    REQUIRE(map.power.rows() == 20);
    REQUIRE(map.power.cols() == 32);

    for (std::size_t k = 0; k < users.size(); ++k)
    {
        const auto visible = map.visible_poses(k);
        CHECK(!visible.empty());
        CHECK(visible.size() < poses.size());
        for (std::size_t m = 0; m < poses.size(); ++m)
        {
            const auto rel = surface_relative_params(user_position(users[k]), poses[m]);
            const bool front = std::abs(rel.local_doa.azimuth) <= 0.5 * pi;
            CHECK((map.power(Eigen::Index(k), Eigen::Index(m)) > 0.0) == front);
        }
    }
}

TEST_CASE("sum capacity matches reference", "[scenario]")
{
    // Reference: tests/oracle/reference_values.py
    Eigen::MatrixXcd H(3, 2);
    H << cdouble(1, 1), 0.5, cdouble(0.2, -0.3), cdouble(0, -1), 0.0, cdouble(0.7, 0.1);
    CHECK_THAT(sum_capacity(H, 1.0, 2.0), WithinRel(4.2592724870375953, 1e-13));
    CHECK(sum_capacity(H, 1.0, 0.0) == 0.0);
    CHECK_THAT(sum_capacity(H, 2.0, 4.0), WithinRel(sum_capacity(H, 1.0, 2.0), 1e-14));
    CHECK_THROWS_AS(sum_capacity(H, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sum_capacity(H, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("sum capacity grows with transmit power", "[scenario][property]")
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 50; ++i)
    {
        Eigen::MatrixXcd H(12, 3);
        for (Eigen::Index r = 0; r < H.rows(); ++r)
            for (Eigen::Index c = 0; c < H.cols(); ++c)
                H(r, c) = cdouble(g(rng), g(rng));
        double prev = 0.0;
        for (double p : {0.01, 0.1, 1.0, 10.0, 100.0})
        {
            const double c = sum_capacity(H, 1.0, p);
            CHECK(c > prev);
            prev = c;
        }
    }
}

TEST_CASE("channel NMSE", "[scenario]")
{
    Eigen::VectorXcd t(2), e(2);
    t << cdouble(1, 0), cdouble(0, 1);
    e << cdouble(1, 0), cdouble(0, 0);
    CHECK(channel_nmse(t, t) == 0.0);
    CHECK_THAT(channel_nmse(e, t), WithinRel(0.5, 1e-15));
    CHECK(std::isinf(channel_nmse(e, Eigen::VectorXcd::Zero(2))));
    CHECK_THROWS_AS(channel_nmse(e, Eigen::VectorXcd::Zero(3)), std::invalid_argument);
    CHECK_THAT(site_aperture(SiteSpace{}), WithinRel(0.5 * std::sqrt(3.0), 1e-15));
}
