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

#include "mpcprof/profiler.hpp"
#include "mpcprof/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace mpcprof::testing
{

// Random parameter set with delays in [lo, hi] T_s (sorted, no separation
// constraint), amplitudes in [0.1, 1] and phases in [0, 2 pi).
inline MpcParamSet random_params(std::mt19937_64 &rng, const SystemConfig &cfg, std::size_t n, double lo = 0.5,
                                 double hi = 8.0)
{
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    MpcParamSet theta;
    for (std::size_t l = 0; l < n; ++l)
        theta.mpcs.push_back({(lo + (hi - lo) * ud(rng)) * cfg.sample_period(), 0.1 + 0.9 * ud(rng), two_pi * ud(rng)});
    sort_by_delay(theta);
    return theta;
}

// Snaps every parameter onto the quantizer lattice.
inline MpcParamSet on_lattice(MpcParamSet theta, const QuantizerSpec &q)
{
    for (Mpc &p : theta.mpcs)
        p = {q.delay(p.tau), q.amplitude(p.alpha), q.phase(p.phi)};
    return theta;
}

// Direct per-tap evaluation of |sum_l alpha e^{j phi} sinc((t_k - tau) B)|.
inline std::vector<double> analytic_profile(const MpcParamSet &theta, const SystemConfig &cfg, std::size_t n_taps)
{
    std::vector<double> out(n_taps);
    for (std::size_t k = 0; k < n_taps; ++k)
    {
        double re = 0.0, im = 0.0;
        const double t = static_cast<double>(k + 1) * cfg.sample_period() / cfg.n_st;
        for (const Mpc &p : theta.mpcs)
        {
            const double x = (t - p.tau) * cfg.bandwidth_b;
            const double s = x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x);
            re += p.alpha * std::cos(p.phi) * s;
            im += p.alpha * std::sin(p.phi) * s;
        }
        out[k] = std::hypot(re, im);
    }
    return out;
}

inline double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline ProfiledCir truncated(ProfiledCir p, std::size_t n)
{
    p.samples.resize(n);
    return p;
}

} // namespace mpcprof::testing
