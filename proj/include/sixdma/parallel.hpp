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

#ifndef sixdma_parallel_H
#define sixdma_parallel_H

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sixdma
{
    // Number of workers to use; 0 selects the hardware concurrency
    inline std::size_t resolve_threads(std::size_t requested)
    {
        if (requested > 0)
            return requested;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : std::size_t(hw);
    }

    // Splits [0, n) into contiguous chunks, one per worker, and calls body(chunk, begin, end).
    // Chunk boundaries depend only on n and the chunk count, so callers can reduce per-chunk
    // results in chunk order and get the same answer for every thread count.
    template <typename Body>
    void parallel_chunks(std::size_t n, std::size_t n_chunks, std::size_t n_threads, Body &&body)
    {
        if (n == 0)
            return;
        n_chunks = std::max<std::size_t>(1, std::min(n_chunks, n));
        auto bounds = [&](std::size_t c)
        { return n * c / n_chunks; };

        n_threads = std::min(resolve_threads(n_threads), n_chunks);
        if (n_threads <= 1)
        {
            for (std::size_t c = 0; c < n_chunks; ++c)
                body(c, bounds(c), bounds(c + 1));
            return;
        }

        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w)
            workers.emplace_back([&, w]
                                 {
                for (std::size_t c = w; c < n_chunks; c += n_threads)
                {
                    try
                    {
                        body(c, bounds(c), bounds(c + 1));
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                    }
                } });
        for (auto &t : workers)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }

    // Calls body(i) for every i in [0, n)
    template <typename Body>
    void parallel_for(std::size_t n, std::size_t n_threads, Body &&body)
    {
        parallel_chunks(n, n, n_threads, [&](std::size_t, std::size_t begin, std::size_t end)
                        {
            for (std::size_t i = begin; i < end; ++i)
                body(i); });
    }
}

#endif
