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
#include "sixdma/pilot.hpp"

#include <set>
#include <vector>

using namespace sixdma;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("derived seeds are deterministic and distinct", "[pilot]")
{
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 20; ++m)
        for (std::uint64_t a = 0; a < 20; ++a)
            seen.insert(derive_seed(m, {a}));
    CHECK(seen.size() == 400);
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {}) != derive_seed(1, {0}));
}

TEST_CASE("combiner entries have constant modulus", "[pilot][property]")
{
    const auto c = make_combiner(16, 10, 99);
    REQUIRE(c.slots() == 10);
    REQUIRE(c.antennas() == 16);
    CHECK((c.W.cwiseAbs().array() - 0.25).abs().maxCoeff() < 1e-15);
    CHECK(make_combiner(16, 10, 99).W == c.W);
    CHECK(make_combiner(16, 10, 100).W != c.W);
    CHECK_THROWS_AS(make_combiner(0, 10, 1), std::invalid_argument);
}

TEST_CASE("whitening matches reference", "[pilot]")
{
    // Reference: tests/oracle/reference_values.py
    MeasurementBatch b;
    b.combiner.W.resize(2, 3);
    b.combiner.W << cdouble(1, 1), 0.5, cdouble(0, -0.2), 0.3, cdouble(2, -1), 0.1;
    b.y.resize(2);
    b.y << cdouble(0.4, -0.2), cdouble(-1.0, 0.5);
    b.noise_variance = 0.1;

    const auto w = whiten(b);
    CHECK_THAT(w.ybar(0).real(), WithinAbs(0.26432744018203586, 1e-15));
    CHECK_THAT(w.ybar(0).imag(), WithinAbs(-0.13216372009101793, 1e-15));
    CHECK_THAT(w.ybar(1).real(), WithinAbs(-0.44280744277004758, 1e-15));
    CHECK_THAT(w.ybar(1).imag(), WithinAbs(0.22140372138502379, 1e-15));
    CHECK_THAT(w.gamma(0, 0).real(), WithinAbs(0.66081860045508967, 1e-15));
    CHECK_THAT(w.gamma(1, 1).real(), WithinAbs(0.88561488554009515, 1e-15));
    CHECK_THAT(w.gamma(1, 1).imag(), WithinAbs(-0.44280744277004758, 1e-15));
    CHECK_THAT(w.gamma(0, 2).imag(), WithinAbs(-0.13216372009101793, 1e-15));

    // Whitened combiner rows have unit norm
    CHECK_THAT(w.gamma.row(0).norm(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(w.gamma.row(1).norm(), WithinAbs(1.0, 1e-15));
    CHECK((w.cholesky_factor * w.ybar - b.y).norm() < 1e-15);
}

TEST_CASE("whitening rejects a zero combiner row", "[pilot]")
{
    MeasurementBatch b;
    b.combiner.W = Eigen::MatrixXcd::Zero(2, 3);
    b.combiner.W(0, 0) = 1.0;
    b.y = Eigen::VectorXcd::Zero(2);
    CHECK_THROWS_AS(whiten(b), std::invalid_argument);
}

TEST_CASE("noiseless measurement is W h", "[pilot]")
{
    const auto c = make_combiner(4, 3, 5);
    Eigen::VectorXcd h(4);
    h << cdouble(1, 2), cdouble(-1, 0.5), 0.0, cdouble(0, 3);
    const auto b = measure(2, SurfacePose(), h, c, 0.0, 17);
    CHECK(b.pose_index == 2);
    CHECK((b.y - c.W * h).norm() == 0.0);
    CHECK_THROWS_AS(measure(0, SurfacePose(), Eigen::VectorXcd::Zero(3), c, 0.0, 1), std::invalid_argument);
}

TEST_CASE("noise realizations scale with the standard deviation", "[pilot][property]")
{
    // Same seed at two noise levels: the realization is scaled, not redrawn
    const auto c = make_combiner(16, 10, 1);
    const auto z1 = combined_noise(c, 1.0, 42);
    const auto z4 = combined_noise(c, 4.0, 42);
    CHECK((z4 - 2.0 * z1).norm() < 1e-14);
    CHECK(combined_noise(c, 0.0, 42).isZero(0.0));
    CHECK_THROWS_AS(combined_noise(c, -1.0, 42), std::invalid_argument);
}

TEST_CASE("combined noise has variance sigma^2 ||w_t||^2", "[pilot][property]")
{
    const auto c = make_combiner(16, 4, 3);
    const double sigma2 = 0.5;
    const int draws = 20000;
    Eigen::VectorXd power = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < draws; ++i)
        power += combined_noise(c, sigma2, derive_seed(9, {std::uint64_t(i)})).cwiseAbs2();
    power /= double(draws);
    for (Eigen::Index t = 0; t < 4; ++t)
        CHECK_THAT(power(t), WithinRel(sigma2 * c.W.row(t).squaredNorm(), 0.05));
}

TEST_CASE("noise variance for a target SNR", "[pilot]")
{
    std::vector<Eigen::VectorXcd> h(3);
    h[0] = Eigen::VectorXcd::Constant(2, cdouble(std::sqrt(2.0), 0.0)); // ||h||^2 / N = 2
    h[1] = Eigen::VectorXcd::Zero(2);                                   // ignored
    h[2] = Eigen::VectorXcd::Constant(2, cdouble(0.0, 1.0));             // ||h||^2 / N = 1
    CHECK_THAT(noise_variance_for_snr(h, 0.0), WithinRel(1.5, 1e-15));
    CHECK_THAT(noise_variance_for_snr(h, 10.0), WithinRel(0.15, 1e-14));
    std::vector<Eigen::VectorXcd> dark{Eigen::VectorXcd::Zero(2)};
    CHECK(noise_variance_for_snr(dark, 10.0) == 0.0);
}
