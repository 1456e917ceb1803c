// SPDX-License-Identifier: Apache-2.0
//
// mpcprof: multipath component profiling, tracking and prediction
// Copyright (C) 2026 The mpcprof Authors
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

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mpcprof
{

// Runs fn(k) for k in [0, n) on up to `workers` threads. Each index is
// processed exactly once; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn &&fn)
{
    workers = std::max(1u, static_cast<unsigned>(std::min<std::size_t>(workers, n)));
    if (workers <= 1)
    {
        for (std::size_t k = 0; k < n; ++k)
            fn(k);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < n && !failed; k = next++)
                {
                    try
                    {
                        fn(k);
                    }
                    catch (...)
                    {
                        if (!failed.exchange(true))
                            failure = std::current_exception();
                    }
                }
            });
    }
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace mpcprof
