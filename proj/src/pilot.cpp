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

#include "sixdma/pilot.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sixdma
{
    std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
    {
        std::vector<std::uint32_t> words;
        words.reserve(2 * (tags.size() + 1));
        auto push = [&](std::uint64_t v)
        {
            words.push_back(std::uint32_t(v & 0xffffffffu));
            words.push_back(std::uint32_t(v >> 32));
        };
        push(master);
        for (auto t : tags)
            push(t);

        std::seed_seq seq(words.begin(), words.end());
        std::uint32_t out[2];
        seq.generate(out, out + 2);
        return (std::uint64_t(out[1]) << 32) | out[0];
    }

    CombinerMatrix make_combiner(std::size_t n_antennas, std::size_t n_slots, std::uint64_t seed)
    {
        if (n_antennas == 0 || n_slots == 0)
            throw std::invalid_argument("make_combiner: N and T must be at least 1");

        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        const double amplitude = 1.0 / std::sqrt(double(n_antennas));

        CombinerMatrix c;
        c.W.resize(Eigen::Index(n_slots), Eigen::Index(n_antennas));
        for (Eigen::Index t = 0; t < c.W.rows(); ++t)
            for (Eigen::Index n = 0; n < c.W.cols(); ++n)
                c.W(t, n) = std::polar(amplitude, phase(rng));
        return c;
    }

    Eigen::VectorXcd combined_noise(const CombinerMatrix &combiner, double noise_variance, std::uint64_t seed)
    {
        if (!(noise_variance >= 0.0))
            throw std::invalid_argument("combined_noise: noise variance must be non-negative");

        const Eigen::Index T = combiner.slots(), N = combiner.antennas();
        Eigen::VectorXcd z = Eigen::VectorXcd::Zero(T);
        if (noise_variance == 0.0)
            return z;

        // Unit-variance draws scaled afterwards, so one seed gives the same realization at every SNR
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        Eigen::VectorXcd zt(N);
        for (Eigen::Index t = 0; t < T; ++t)
        {
            for (Eigen::Index n = 0; n < N; ++n)
            {
                const double re = normal(rng);
                zt(n) = cdouble(re, normal(rng));
            }
            z(t) = (combiner.W.row(t) * zt).value();
        }
        return std::sqrt(noise_variance) * z;
    }

    MeasurementBatch measure(std::size_t pose_index, const SurfacePose &pose, const Eigen::VectorXcd &channel,
                             const CombinerMatrix &combiner, double noise_variance, std::uint64_t seed)
    {
        if (channel.size() != combiner.antennas())
            throw std::invalid_argument("measure: channel length does not match the combiner");

        MeasurementBatch batch;
        batch.pose_index = pose_index;
        batch.pose = pose;
        batch.combiner = combiner;
        batch.noise_variance = noise_variance;
        batch.y = combiner.W * channel + combined_noise(combiner, noise_variance, seed);
        return batch;
    }

    MeasurementBatch simulate_measurement(std::size_t pose_index, const SurfacePose &pose, const ArrayLayout &layout,
                                          const UserPathState &path, const CarrierConfig &carrier,
                                          const AntennaPattern &pattern, const CombinerMatrix &combiner,
                                          double noise_variance, std::uint64_t seed)
    {
        const Eigen::VectorXcd h = hybrid_pose_channel(pose, layout, path, carrier, pattern);
        return measure(pose_index, pose, h, combiner, noise_variance, seed);
    }

    WhitenedMeasurement whiten(const MeasurementBatch &batch)
    {
        const Eigen::MatrixXcd &W = batch.combiner.W;
        const Eigen::Index T = W.rows();
        if (batch.y.size() != T)
            throw std::invalid_argument("whiten: received vector length does not match the combiner");

        // C / sigma^2 = diag(w_t^H w_t) for independent per-slot noise
        Eigen::MatrixXcd scaled_cov = Eigen::MatrixXcd::Zero(T, T);
        for (Eigen::Index t = 0; t < T; ++t)
        {
            const double e = W.row(t).squaredNorm();
            if (!(e > 0.0))
                throw std::invalid_argument("whiten: combiner row " + std::to_string(t) + " is zero");
            scaled_cov(t, t) = e;
        }

        Eigen::LLT<Eigen::MatrixXcd> llt(scaled_cov);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("whiten: noise covariance is not positive definite");

        WhitenedMeasurement w;
        w.cholesky_factor = llt.matrixL();
        const auto L = w.cholesky_factor.triangularView<Eigen::Lower>();
        w.ybar = L.solve(batch.y);
        w.gamma = L.solve(W);
        return w;
    }

    double noise_variance_for_snr(std::span<const Eigen::VectorXcd> pose_channels, double snr_db)
    {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto &h : pose_channels)
        {
            const double e = h.squaredNorm();
            if (e > 0.0)
            {
                sum += e / double(h.size());
                ++count;
            }
        }
        if (count == 0)
            return 0.0;
        return (sum / double(count)) / std::pow(10.0, 0.1 * snr_db);
    }
}
