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

#include "mpcprof/types.hpp"

#include "mpcprof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpcprof
{

double wrap_phase(double phi)
{
    double r = std::fmod(phi, two_pi);
    if (r < 0.0)
        r += two_pi;
    if (r >= two_pi)
        r = 0.0;
    return r;
}

double wrap_pi(double phi)
{
    double r = wrap_phase(phi);
    if (r > pi)
        r -= two_pi;
    return r;
}

void SystemConfig::validate() const
{
    if (n_sc < 1 || m_prb < 1 || n1 < 1 || n2 < 1 || n_st < 1 || obs_window_w < 1)
        throw ConfigError("system config: counts must be >= 1");
    if (!(csi_rs_spacing > 0.0) || !(d_v > 0.0) || !(d_h > 0.0) || !(carrier_wavelength > 0.0))
        throw ConfigError("system config: spacings must be > 0");
    if (!(bandwidth_b > 0.0))
        throw ConfigError("system config: bandwidth must be > 0");
    if (static_cast<std::size_t>(obs_window_w) > grid_length())
        throw ConfigError("system config: m_prb * n_st (" + std::to_string(grid_length()) +
                          ") must cover the observation window (" + std::to_string(obs_window_w) + ")");
    if (tilt_angles.empty() || azimuth_angles.empty())
        throw ConfigError("system config: beam angle sets must not be empty");
}

void validate(const MpcParamSet &theta, const SystemConfig &cfg, bool require_sorted)
{
    if (theta.mpcs.empty())
        throw DomainError("parameter set: L must be >= 1");
    const double tau_max = cfg.max_delay();
    for (std::size_t l = 0; l < theta.size(); ++l)
    {
        const Mpc &p = theta.mpcs[l];
        if (!std::isfinite(p.tau) || !std::isfinite(p.alpha) || !std::isfinite(p.phi))
            throw DomainError("parameter set: non-finite entry at path " + std::to_string(l));
        if (p.alpha < 0.0)
            throw DomainError("parameter set: negative amplitude at path " + std::to_string(l));
        if (p.phi < 0.0 || p.phi >= two_pi)
            throw DomainError("parameter set: phase outside [0, 2pi) at path " + std::to_string(l));
        if (p.tau < 0.0 || p.tau >= tau_max)
            throw DomainError("parameter set: delay outside [0, M*T_s) at path " + std::to_string(l));
        if (require_sorted && l > 0 && p.tau < theta.mpcs[l - 1].tau)
            throw DomainError("parameter set: delays not ascending at path " + std::to_string(l));
    }
}

void sort_by_delay(MpcParamSet &theta)
{
    std::stable_sort(theta.mpcs.begin(), theta.mpcs.end(),
                     [](const Mpc &a, const Mpc &b) { return a.tau < b.tau; });
}

void normalize(MpcParamSet &theta)
{
    for (Mpc &p : theta.mpcs)
    {
        p.alpha = std::max(p.alpha, 0.0);
        p.phi = wrap_phase(p.phi);
    }
}

} // namespace mpcprof
