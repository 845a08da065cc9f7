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

#include "sixdma/selftest.hpp"
#include "sixdma/estimator.hpp"
#include "sixdma/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace sixdma
{
    namespace
    {
        std::string fmt(const char *f, double v)
        {
            char buf[96];
            std::snprintf(buf, sizeof buf, f, v);
            return buf;
        }

        Eigen::Vector3d random_rotation(std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
            return {u(rng), u(rng), u(rng)};
        }

        SelfTestCheck rotations(bool inject_fault)
        {
            std::mt19937_64 rng(11);
            double worst = 0.0;
            bool proper = true;
            for (int i = 0; i < 10000; ++i)
            {
                Eigen::Matrix3d R = rotation_matrix(random_rotation(rng));
                if (inject_fault)
                    R(0, 1) += 1e-6;
                worst = std::max(worst, (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
                proper = proper && is_proper_rotation(R);
            }
            return {"rotation orthonormality (1e4 draws)", proper, fmt("max |R^T R - I| = %.3g", worst)};
        }

        SelfTestCheck rayleigh()
        {
            const double rd = rayleigh_distance(0.5 * std::sqrt(3.0), CarrierConfig{});
            return {"Rayleigh distance at A = 0.5 m, 0.1 THz", std::abs(rd - 500.0) <= 2.5, fmt("RD = %.3f m", rd)};
        }

        UserPathState random_user(std::mt19937_64 &rng, const CarrierConfig &carrier)
        {
            std::uniform_real_distribution<double> d(20.0, 800.0), az(-pi, pi), el(-0.5 * pi, 0.5 * pi), ph(0.0, 2.0 * pi);
            UserPathState u;
            u.distance = d(rng);
            u.doa = {az(rng), el(rng)};
            u.path_gain = free_space_path_gain(u.distance, carrier, ph(rng));
            return u;
        }

        SelfTestCheck reduces_to_far()
        {
            std::mt19937_64 rng(12);
            const CarrierConfig carrier;
            const auto layout = ArrayLayout::upa(16, 0.5 * carrier.wavelength());
            const auto pattern = AntennaPattern::directive();
            double worst = 0.0;
            for (int i = 0; i < 100; ++i)
            {
                const SurfacePose pose(Eigen::Vector3d::Zero(), random_rotation(rng));
                const auto user = random_user(rng, carrier);
                const auto hf = channel_far(std::span(&pose, 1), layout, user, carrier, pattern).coefficients;
                const auto hh = channel_hybrid(std::span(&pose, 1), layout, user, carrier, pattern).coefficients;
                worst = std::max(worst, (hf - hh).cwiseAbs().maxCoeff() / std::abs(user.path_gain));
            }
            return {"hybrid equals far for one surface at the origin", worst <= 1e-12, fmt("max deviation %.3g", worst)};
        }

        SelfTestCheck reduces_to_near()
        {
            std::mt19937_64 rng(13);
            const CarrierConfig carrier;
            const auto layout = ArrayLayout::upa(1, 0.5 * carrier.wavelength());
            const auto pattern = AntennaPattern::directive();
            const auto poses = place_candidate_poses(8, SiteSpace{});
            double worst = 0.0;
            for (int i = 0; i < 100; ++i)
            {
                const auto user = random_user(rng, carrier);
                const auto hn = channel_near(poses, layout, user, carrier, pattern, NearFieldGain::common).coefficients;
                const auto hh = channel_hybrid(poses, layout, user, carrier, pattern).coefficients;
                worst = std::max(worst, (hn - hh).cwiseAbs().maxCoeff() / std::abs(user.path_gain));
            }
            return {"hybrid equals near for single-antenna surfaces", worst <= 1e-12, fmt("max deviation %.3g", worst)};
        }

        SelfTestCheck whitening()
        {
            const std::size_t N = 16, T = 10, draws = 20000;
            const double sigma2 = 0.7;
            const auto W = make_combiner(N, T, 14);
            MeasurementBatch batch;
            batch.combiner = W;
            batch.noise_variance = sigma2;
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(T, T);
            for (std::size_t i = 0; i < draws; ++i)
            {
                batch.y = combined_noise(W, sigma2, derive_seed(15, {i}));
                const auto w = whiten(batch);
                acc += w.ybar * w.ybar.adjoint();
            }
            acc /= double(draws);
            const double err = (acc - sigma2 * Eigen::MatrixXcd::Identity(T, T)).cwiseAbs().maxCoeff() / sigma2;
            return {"whitened noise covariance (2e4 draws)", err <= 0.05, fmt("max relative entry error %.3g", err)};
        }

        SelfTestCheck clustering()
        {
            std::vector<CoarseEstimate> e(6);
            const double pts[6][3] = {{100, 0, 0}, {101, 0, 0}, {-300, 5, 0}, {100, 1, 0}, {-301, 5, 0}, {0, 0, 700}};
            for (std::size_t i = 0; i < 6; ++i)
                e[i].cartesian = Eigen::Vector3d(pts[i][0], pts[i][1], pts[i][2]);
            const auto s = cluster_estimates(e, 10.0);
            std::vector<int> seen(6, 0);
            bool ok = s.count() == 3;
            for (std::size_t i = 0; i < s.count(); ++i)
            {
                Eigen::Vector3d mean = Eigen::Vector3d::Zero();
                for (auto j : s.clusters[i])
                {
                    ++seen[j];
                    mean += e[j].cartesian;
                }
                mean /= double(s.clusters[i].size());
                ok = ok && (mean - s.centers[i]).norm() <= 1e-12;
            }
            for (int c : seen)
                ok = ok && c == 1;
            ok = ok && select_largest_cluster(s).cluster_index == 0;
            return {"clustering partition and member-mean centers", ok, fmt("%g clusters", double(s.count()))};
        }

        SelfTestCheck noiseless_refinement()
        {
            EstimatorModel model;
            model.layout = ArrayLayout::upa(16, 0.5 * model.carrier.wavelength());
            GridSpec coarse;
            FineGridSpec fine;
            fine.distance_span = 0.4;
            fine.azimuth_span = fine.elevation_span = 4.0 * fine.azimuth_step;

            // On-lattice user, seen by the poses that face it
            const double d = lattice_value(fine.distance_origin, fine.distance_step, 1300);
            const double az = lattice_value(fine.azimuth_origin, fine.azimuth_step, 2000);
            const double el = lattice_value(fine.elevation_origin, fine.elevation_step, 1200);
            UserPathState user{d, {az, el}, free_space_path_gain(d, model.carrier, 0.3)};

            std::vector<WhitenedMeasurement> data;
            std::vector<SurfacePose> poses;
            std::size_t m = 0;
            for (const auto &pose : place_candidate_poses(16, SiteSpace{}))
            {
                const auto h = hybrid_pose_channel(pose, model.layout, user, model.carrier, model.pattern);
                if (h.squaredNorm() == 0.0)
                    continue;
                const auto W = make_combiner(16, 10, derive_seed(16, {m}));
                data.push_back(whiten(measure(m++, pose, h, W, 0.0, 0)));
                poses.push_back(pose);
            }
            const auto grid = make_fine_grid(fine, {d, az, el});
            const auto r = refine_joint(data, poses, model, grid);
            const double gain_err = std::abs(r.path_gain - user.path_gain) / std::abs(user.path_gain);
            const bool ok = poses.size() >= 3 && r.polar == Candidate{d, az, el} && gain_err <= 1e-8;
            return {"noiseless joint refinement recovers an on-grid user", ok,
                    fmt("path gain relative error %.3g", gain_err)};
        }
    }

    std::vector<SelfTestCheck> run_selftest(const SelfTestOptions &options)
    {
        std::vector<SelfTestCheck> checks;
        auto guarded = [&](auto fn)
        {
            try
            {
                checks.push_back(fn());
            }
            catch (const std::exception &e)
            {
                checks.push_back({"check raised an exception", false, e.what()});
            }
        };
        guarded([&]
                { return rotations(options.inject_rotation_fault); });
        guarded(rayleigh);
        guarded(reduces_to_far);
        guarded(reduces_to_near);
        guarded(whitening);
        guarded(clustering);
        guarded(noiseless_refinement);
        return checks;
    }
}
