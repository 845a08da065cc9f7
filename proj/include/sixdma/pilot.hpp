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

#ifndef sixdma_pilot_H
#define sixdma_pilot_H

#include "sixdma/channel.hpp"
#include "sixdma/geometry.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace sixdma
{
    // Derives an independent 64-bit stream seed from a master seed and a list of stream tags.
    // Used to split randomness per trial / pose so parallel and serial runs draw identical numbers.
    std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

    // Analog combining matrix W (T x N). Row t applies w_t^H to the N antenna signals, so
    // W h stacks w_t^H h. Every entry has modulus 1/sqrt(N).
    struct CombinerMatrix
    {
        Eigen::MatrixXcd W;

        Eigen::Index slots() const { return W.rows(); }
        Eigen::Index antennas() const { return W.cols(); }
    };

    // Entries exp(j psi) / sqrt(N) with psi ~ U[0, 2pi) drawn from the seeded generator
    CombinerMatrix make_combiner(std::size_t n_antennas, std::size_t n_slots, std::uint64_t seed);

    // Received pilots of one position-rotation pair: y = W h + z, with s_t = 1
    struct MeasurementBatch
    {
        std::size_t pose_index = 0;
        SurfacePose pose;
        Eigen::VectorXcd y;
        CombinerMatrix combiner;
        double noise_variance = 0.0; // sigma^2 per receive antenna
    };

    // Combined noise W-row-wise: entry t is w_t^H z_t with z_t ~ CN(0, sigma^2 I_N)
    Eigen::VectorXcd combined_noise(const CombinerMatrix &combiner, double noise_variance, std::uint64_t seed);

    // y = W h + z for a given single-pose channel h
    MeasurementBatch measure(std::size_t pose_index, const SurfacePose &pose, const Eigen::VectorXcd &channel,
                             const CombinerMatrix &combiner, double noise_variance, std::uint64_t seed);

    MeasurementBatch simulate_measurement(std::size_t pose_index, const SurfacePose &pose, const ArrayLayout &layout,
                                          const UserPathState &path, const CarrierConfig &carrier,
                                          const AntennaPattern &pattern, const CombinerMatrix &combiner,
                                          double noise_variance, std::uint64_t seed);

    // Whitened observation ybar = D^-1 y, Gamma = D^-1 W, with sigma^2 D D^H the noise covariance
    struct WhitenedMeasurement
    {
        Eigen::VectorXcd ybar;
        Eigen::MatrixXcd gamma;
        Eigen::MatrixXcd cholesky_factor; // D, lower triangular
    };

    WhitenedMeasurement whiten(const MeasurementBatch &batch);

    // sigma^2 such that mean_m ||h_m||^2 / (N sigma^2) equals the target SNR, averaged over the
    // poses with non-zero channel. Returns 0 if every channel is zero.
    double noise_variance_for_snr(std::span<const Eigen::VectorXcd> pose_channels, double snr_db);
}

#endif
