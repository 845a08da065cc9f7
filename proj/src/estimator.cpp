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

#include "sixdma/estimator.hpp"
#include "sixdma/parallel.hpp"

#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <limits>

namespace sixdma
{
    namespace
    {
        // Evaluates the single-pose atom sqrt(g) e^{-jk d_m} a(local DOA) for candidate user positions.
        // Mirrors hybrid_pose_channel, with a separable fast path for uniform planar arrays.
        class PoseAtoms
        {
        public:
            PoseAtoms(const SurfacePose &pose, const EstimatorModel &model)
                : q_(pose.position()), Rt_(rotation_matrix(pose.rotation()).transpose()), model_(&model),
                  k_(model.carrier.wavenumber()), at_origin_(pose.position().isZero(0.0))
            {
                const auto &L = model.layout;
                separable_ = L.n_rows * L.n_cols == L.size() && L.size() > 0;
                if (separable_)
                {
                    ys_.resize(L.n_cols);
                    zs_.resize(L.n_rows);
                    for (std::size_t c = 0; c < L.n_cols; ++c)
                        ys_[c] = L.positions[c](1);
                    for (std::size_t r = 0; r < L.n_rows; ++r)
                        zs_[r] = L.positions[r * L.n_cols](2);
                    for (std::size_t n = 0; n < L.size() && separable_; ++n)
                    {
                        const auto &p = L.positions[n];
                        separable_ = p(0) == 0.0 && p(1) == ys_[n % L.n_cols] && p(2) == zs_[n / L.n_cols];
                    }
                    auto equally_spaced = [](const std::vector<double> &x)
                    {
                        for (std::size_t i = 2; i < x.size(); ++i)
                            if (std::abs((x[i] - x[i - 1]) - (x[1] - x[0])) > 1e-12 * std::abs(x[1] - x[0]))
                                return false;
                        return true;
                    };
                    separable_ = separable_ && equally_spaced(ys_) && equally_spaced(zs_);
                    ey_.resize(L.n_cols);
                    ez_.resize(L.n_rows);
                }
            }

            std::size_t size() const { return model_->layout.size(); }

            // Returns the linear gain (0 if dark); fills distance and steering vector when visible.
            // `direction` must be the unit vector of `user`. Without `need_gain`, visible poses return 1.
            double evaluate(double distance, const Eigen::Vector3d &direction, const Eigen::Vector3d &user,
                            double &pose_distance, Eigen::VectorXcd &a, bool need_gain = true)
            {
                Eigen::Vector3d dir;
                if (at_origin_)
                {
                    pose_distance = distance;
                    dir = direction;
                }
                else
                {
                    const Eigen::Vector3d offset = user - q_;
                    pose_distance = offset.norm();
                    if (!(pose_distance > 0.0))
                        return 0.0;
                    dir = offset / pose_distance;
                }
                const Eigen::Vector3d local = Rt_ * dir;
                const double g = need_gain ? model_->pattern.linear_gain(local) : double(model_->pattern.visible(local));
                if (g == 0.0)
                    return 0.0;
                steering(local, a);
                return g;
            }

            double wavenumber() const { return k_; }

        private:
            void steering(const Eigen::Vector3d &local, Eigen::VectorXcd &a)
            {
                const auto &L = model_->layout;
                a.resize(Eigen::Index(L.size()));
                if (!separable_)
                {
                    for (std::size_t n = 0; n < L.size(); ++n)
                        a(Eigen::Index(n)) = std::polar(1.0, k_ * local.dot(L.positions[n]));
                    return;
                }
                progression(k_ * local(1), ys_, ey_);
                progression(k_ * local(2), zs_, ez_);
                Eigen::Index n = 0;
                for (std::size_t r = 0; r < zs_.size(); ++r)
                    for (std::size_t c = 0; c < ys_.size(); ++c)
                        a(n++) = ez_[r] * ey_[c];
            }

            // out[i] = exp(j w x[i]) for equally spaced x, by repeated multiplication
            static void progression(double w, const std::vector<double> &x, std::vector<cdouble> &out)
            {
                out[0] = std::polar(1.0, w * x[0]);
                if (x.size() < 2)
                    return;
                const cdouble step = std::polar(1.0, w * (x[1] - x[0]));
                for (std::size_t i = 1; i < x.size(); ++i)
                    out[i] = out[i - 1] * step;
            }

            Eigen::Vector3d q_;
            Eigen::Matrix3d Rt_;
            const EstimatorModel *model_;
            double k_;
            bool at_origin_;
            bool separable_ = false;
            std::vector<double> ys_, zs_;
            std::vector<cdouble> ey_, ez_;
        };

        // One pose's contribution to the correlation ratio. With gamma set, the pose is
        // whitened data (v = Gamma^H ybar); without, v is a channel estimate and the atom
        // energy is g * N.
        struct Member
        {
            PoseAtoms atoms;
            Eigen::VectorXcd v;
            const Eigen::MatrixXcd *gamma = nullptr;
        };

        struct Scratch
        {
            Eigen::VectorXcd a, b;
        };

        // Accumulates atom^H data and ||atom||^2 over members for one candidate.
        // With `unit_scalars` the factor sqrt(g) e^{-jk d_m} is dropped; it cancels in a
        // single-pose ratio but not in a joint one.
        void accumulate(std::vector<Member> &members, const Candidate &cand, const Eigen::Vector3d &direction,
                        Scratch &s, cdouble &num, double &den, bool unit_scalars = false)
        {
            const Eigen::Vector3d user = cand.distance * direction;
            num = 0.0;
            den = 0.0;
            for (auto &m : members)
            {
                double dm = 0.0;
                const double g = m.atoms.evaluate(cand.distance, direction, user, dm, s.a, !unit_scalars);
                if (g == 0.0)
                    continue;
                const double w = unit_scalars ? 1.0 : g;
                const cdouble corr = s.a.dot(m.v);
                num += unit_scalars ? corr : std::conj(std::polar(std::sqrt(g), -m.atoms.wavenumber() * dm)) * corr;
                if (m.gamma)
                {
                    s.b.noalias() = (*m.gamma) * s.a;
                    den += w * s.b.squaredNorm();
                }
                else
                    den += w * double(s.a.size());
            }
        }

        struct Best
        {
            double objective = -1.0;
            std::size_t index = 0;
            cdouble num{};
            double den = 0.0;
        };

        // Argmax of |num|^2 / den over the grid; ties go to the smallest index
        Best grid_argmax(std::vector<Member> members, const SearchGrid &grid, std::size_t threads,
                        bool unit_scalars = false)
        {
            if (grid.empty())
                throw std::invalid_argument("estimator: search grid is empty");

            const auto &az = grid.azimuths();
            const auto &el = grid.elevations();
            std::vector<Eigen::Vector3d> dirs(az.size() * el.size());
            for (std::size_t i = 0; i < az.size(); ++i)
                for (std::size_t j = 0; j < el.size(); ++j)
                    dirs[i * el.size() + j] = doa_unit_vector({az[i], el[j]});

            const std::size_t n = grid.size();
            const std::size_t n_chunks = std::min<std::size_t>(n, 4 * resolve_threads(threads) * 16);
            std::vector<Best> chunk_best(n_chunks);

            parallel_chunks(n, n_chunks, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end)
                            {
                std::vector<Member> local = members; // PoseAtoms holds mutable scratch
                Scratch s;
                Best best;
                for (std::size_t idx = begin; idx < end; ++idx)
                {
                    const Candidate cand = grid.at(idx);
                    cdouble num;
                    double den;
                    accumulate(local, cand, dirs[idx % dirs.size()], s, num, den, unit_scalars);
                    const double obj = den > 0.0 ? std::norm(num) / den : 0.0;
                    if (obj > best.objective)
                        best = {obj, idx, num, den};
                }
                chunk_best[chunk] = best; });

            Best best;
            for (const auto &b : chunk_best)
                if (b.objective > best.objective)
                    best = b;
            return best;
        }

        Member whitened_member(const WhitenedMeasurement &w, const SurfacePose &pose, const EstimatorModel &model)
        {
            if (w.gamma.cols() != Eigen::Index(model.layout.size()))
                throw std::invalid_argument("estimator: measurement size does not match the array layout");
            return {PoseAtoms(pose, model), w.gamma.adjoint() * w.ybar, &w.gamma};
        }

        std::pair<cdouble, double> single_candidate(const WhitenedMeasurement &w, const SurfacePose &pose,
                                                    const EstimatorModel &model, const Candidate &cand)
        {
            if (!(cand.distance > 0.0))
                throw std::invalid_argument("estimator: candidate distance must be positive");
            std::vector<Member> members{whitened_member(w, pose, model)};
            Scratch s;
            cdouble num;
            double den;
            accumulate(members, cand, doa_unit_vector(cand.doa()), s, num, den);
            return {num, den};
        }

        FineGridSpec anchored(FineGridSpec fine, const GridSpec &coarse)
        {
            fine.distance_origin = coarse.distance.lo;
            fine.azimuth_origin = coarse.azimuth.lo;
            fine.elevation_origin = coarse.elevation.lo;
            return fine;
        }

        Candidate polar_of(const Eigen::Vector3d &point)
        {
            const double d = point.norm();
            if (!(d > 0.0))
                throw std::runtime_error("estimator: cluster center coincides with the BS reference point");
            const DoaAngles a = angles_from_unit_vector(point / d);
            return {d, a.azimuth, a.elevation};
        }

        double seconds_since(std::chrono::steady_clock::time_point t0)
        {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    }

    double coarse_objective(const WhitenedMeasurement &whitened, const SurfacePose &pose, const EstimatorModel &model,
                            const Candidate &candidate)
    {
        const auto [num, den] = single_candidate(whitened, pose, model, candidate);
        return den > 0.0 ? std::norm(num) / den : 0.0;
    }

    cdouble estimate_path_gain(const WhitenedMeasurement &whitened, const SurfacePose &pose,
                               const EstimatorModel &model, const Candidate &candidate)
    {
        const auto [num, den] = single_candidate(whitened, pose, model, candidate);
        if (!(den > 0.0))
            throw DarkCandidateError("estimate_path_gain: pose is dark at this candidate");
        return num / den;
    }

    CoarseEstimate coarse_search(const WhitenedMeasurement &whitened, const SurfacePose &pose,
                                 const EstimatorModel &model, const SearchGrid &grid, std::size_t pose_index,
                                 std::size_t threads)
    {
        std::vector<Member> members{whitened_member(whitened, pose, model)};
        const Best best = grid_argmax(std::move(members), grid, threads, true);

        CoarseEstimate e;
        e.pose_index = pose_index;
        e.polar = grid.at(best.index);
        e.objective = best.objective;
        e.path_gain = best.objective > 0.0 ? estimate_path_gain(whitened, pose, model, e.polar) : cdouble{};
        e.cartesian = user_position(e.polar.distance, e.polar.doa());
        e.flagged = best.objective == 0.0;
        return e;
    }

    ClusterState cluster_estimates(std::span<const CoarseEstimate> estimates, double epsilon)
    {
        if (estimates.empty())
            throw std::invalid_argument("cluster_estimates: at least one estimate is required");
        if (!(epsilon > 0.0))
            throw std::invalid_argument("cluster_estimates: threshold must be positive");

        ClusterState state;
        state.threshold = epsilon;
        state.clusters.push_back({0});
        state.centers.push_back(estimates[0].cartesian);

        for (std::size_t m = 1; m < estimates.size(); ++m)
        {
            const Eigen::Vector3d &p = estimates[m].cartesian;
            std::size_t best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < state.count(); ++i)
            {
                const double dist = (p - state.centers[i]).norm();
                if (dist < best_dist)
                {
                    best_dist = dist;
                    best = i;
                }
            }
            if (best_dist <= epsilon)
            {
                auto &members = state.clusters[best];
                members.push_back(m);
                Eigen::Vector3d sum = Eigen::Vector3d::Zero();
                for (auto j : members)
                    sum += estimates[j].cartesian;
                state.centers[best] = sum / double(members.size());
            }
            else
            {
                state.clusters.push_back({m});
                state.centers.push_back(p);
            }
        }
        return state;
    }

    LargestCluster select_largest_cluster(const ClusterState &state)
    {
        if (state.count() == 0)
            throw std::invalid_argument("select_largest_cluster: no clusters");
        std::size_t best = 0;
        for (std::size_t i = 1; i < state.count(); ++i)
            if (state.clusters[i].size() > state.clusters[best].size())
                best = i;
        return {best, state.clusters[best], state.centers[best]};
    }

    RefinedEstimate refine_joint(std::span<const WhitenedMeasurement> whitened, std::span<const SurfacePose> poses,
                                 const EstimatorModel &model, const SearchGrid &grid,
                                 std::span<const std::size_t> pose_indices, std::size_t threads)
    {
        if (whitened.empty() || whitened.size() != poses.size())
            throw std::invalid_argument("refine_joint: need one pose per whitened measurement");
        if (!pose_indices.empty() && pose_indices.size() != poses.size())
            throw std::invalid_argument("refine_joint: pose index list has the wrong length");

        std::vector<Member> members;
        members.reserve(poses.size());
        for (std::size_t s = 0; s < poses.size(); ++s)
            members.push_back(whitened_member(whitened[s], poses[s], model));

        const Best best = grid_argmax(std::move(members), grid, threads);
        if (!(best.den > 0.0))
            throw DarkCandidateError("refine_joint: every candidate is dark for every member pose");

        RefinedEstimate r;
        r.polar = grid.at(best.index);
        r.objective = best.objective;
        r.path_gain = best.num / best.den;
        if (pose_indices.empty())
            for (std::size_t s = 0; s < poses.size(); ++s)
                r.pose_indices.push_back(s);
        else
            r.pose_indices.assign(pose_indices.begin(), pose_indices.end());
        return r;
    }

    ChannelVector reconstruct_channel(const RefinedEstimate &refined, const SurfacePose &pose,
                                      const EstimatorModel &model)
    {
        return channel_hybrid(std::span<const SurfacePose>(&pose, 1), model.layout, refined.path(), model.carrier,
                              model.pattern);
    }

    Algorithm1Result run_algorithm1(std::span<const MeasurementBatch> measurements, const EstimatorModel &model,
                                    const Algorithm1Config &config)
    {
        if (measurements.empty())
            throw std::invalid_argument("run_algorithm1: at least one measurement is required");
        config.fine.validate(config.coarse);

        Algorithm1Result result;
        auto &diag = result.diagnostics;
        diag.epsilon = config.epsilon > 0.0 ? config.epsilon : default_cluster_threshold(config.coarse);

        // Step 1: surface-wise estimation
        const auto t1 = std::chrono::steady_clock::now();
        const std::size_t M = measurements.size();
        std::vector<WhitenedMeasurement> whitened(M);
        for (std::size_t m = 0; m < M; ++m)
            whitened[m] = whiten(measurements[m]);

        const SearchGrid coarse_grid = make_coarse_grid(config.coarse);
        diag.coarse_grid_size = coarse_grid.size();
        diag.coarse.resize(M);
        parallel_for(M, config.threads, [&](std::size_t m)
                     { diag.coarse[m] = coarse_search(whitened[m], measurements[m].pose, model, coarse_grid,
                                                      measurements[m].pose_index, 1); });

        std::vector<CoarseEstimate> usable;
        for (std::size_t m = 0; m < M; ++m)
            if (!diag.coarse[m].flagged)
            {
                diag.clustered.push_back(m);
                usable.push_back(diag.coarse[m]);
            }
        if (usable.empty())
            throw std::runtime_error("run_algorithm1: every pose returned an all-zero objective");

        diag.clusters = cluster_estimates(usable, diag.epsilon);
        diag.largest = select_largest_cluster(diag.clusters);
        for (auto &j : diag.largest.members)
            j = diag.clustered[j];
        diag.stage1_seconds = seconds_since(t1);

        // Step 2: joint refinement on the fine window around the largest cluster
        const auto t2 = std::chrono::steady_clock::now();
        const SearchGrid fine_grid = make_fine_grid(anchored(config.fine, config.coarse), polar_of(diag.largest.center));
        diag.fine_grid_size = fine_grid.size();

        std::vector<WhitenedMeasurement> member_data;
        std::vector<SurfacePose> member_poses;
        std::vector<std::size_t> member_ids;
        for (auto j : diag.largest.members)
        {
            member_data.push_back(whitened[j]);
            member_poses.push_back(measurements[j].pose);
            member_ids.push_back(measurements[j].pose_index);
        }
        result.estimate = refine_joint(member_data, member_poses, model, fine_grid, member_ids, config.threads);
        diag.stage2_seconds = seconds_since(t2);
        return result;
    }

    Eigen::VectorXcd min_norm_channel_estimate(const MeasurementBatch &batch)
    {
        const Eigen::MatrixXcd &W = batch.combiner.W;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(W);
        if (cod.rank() < std::min(W.rows(), W.cols()))
            throw std::invalid_argument("min_norm_channel_estimate: combiner is rank deficient");
        return cod.solve(batch.y);
    }

    RefinedEstimate ls_baseline(std::span<const MeasurementBatch> measurements, const EstimatorModel &model,
                                const GridSpec &coarse, const FineGridSpec &fine, std::size_t threads)
    {
        if (measurements.empty())
            throw std::invalid_argument("ls_baseline: at least one measurement is required");
        fine.validate(coarse);

        std::vector<Member> members;
        members.reserve(measurements.size());
        for (const auto &batch : measurements)
        {
            if (batch.combiner.antennas() != Eigen::Index(model.layout.size()))
                throw std::invalid_argument("ls_baseline: measurement size does not match the array layout");
            members.push_back({PoseAtoms(batch.pose, model), min_norm_channel_estimate(batch), nullptr});
        }

        const SearchGrid coarse_grid = make_coarse_grid(coarse);
        const Best first = grid_argmax(members, coarse_grid, threads);
        const SearchGrid fine_grid = make_fine_grid(anchored(fine, coarse), coarse_grid.at(first.index));
        const Best best = grid_argmax(std::move(members), fine_grid, threads);

        RefinedEstimate r;
        r.polar = fine_grid.at(best.index);
        r.objective = best.objective;
        r.path_gain = best.den > 0.0 ? best.num / best.den : cdouble{};
        for (const auto &batch : measurements)
            r.pose_indices.push_back(batch.pose_index);
        return r;
    }
}
