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

#ifndef sixdma_selftest_H
#define sixdma_selftest_H

#include <string>
#include <vector>

namespace sixdma
{
    struct SelfTestOptions
    {
        bool inject_rotation_fault = false; // perturbs the rotation matrices seen by the orthonormality check
    };

    struct SelfTestCheck
    {
        std::string name;
        bool passed = false;
        std::string detail;
    };

    // Fast invariant suite: rotations, Rayleigh distance, model reductions, whitening,
    // clustering and noiseless estimation
    std::vector<SelfTestCheck> run_selftest(const SelfTestOptions &options = {});
}

#endif
