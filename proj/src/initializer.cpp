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

#include "mpcprof/initializer.hpp"

#include "mpcprof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mpcprof
{

NnInput prepare_input(const ComplexCir &cir, const SystemConfig &cfg)
{
    const auto w = static_cast<std::size_t>(cfg.obs_window_w);
    if (cir.samples.size() < w)
        throw DomainError("prepare_input: CIR has " + std::to_string(cir.samples.size()) + " taps, window needs " +
                          std::to_string(w));
    NnInput in;
    in.window = w;
    in.values.resize(2 * w);
    for (std::size_t k = 0; k < w; ++k)
    {
        const cdouble z = cir.samples[k];
        const double mag = std::abs(z);
        in.values[2 * k] = mag;
        // atan2 returns [-pi, pi]; -pi is folded onto pi.
        double ph = mag > 0.0 ? std::atan2(z.imag(), z.real()) : 0.0;
        if (ph <= -pi)
            ph = pi;
        in.values[2 * k + 1] = ph;
    }
    return in;
}

MpcParamSet nn_infer(const NnInput &input, const WeightBundle &weights, const SystemConfig &cfg)
{
    if (weights.architecture_id != mpc_net_architecture)
        throw FormatError("nn_infer: bundle architecture '" + weights.architecture_id + "' is not '" +
                          mpc_net_architecture + "'");
    if (weights.input_window != input.window || input.window != static_cast<std::size_t>(cfg.obs_window_w))
        throw FormatError("nn_infer: bundle window " + std::to_string(weights.input_window) +
                          " does not match the observation window " + std::to_string(cfg.obs_window_w));
    const std::size_t n_out = weights.check_chain();
    if (weights.model_order == 0 || n_out != 3 * weights.model_order)
        throw FormatError("nn_infer: output width " + std::to_string(n_out) + " is not 3L");

    const std::vector<double> raw = forward(weights, input.values, input.window, 2);

    const double ts = cfg.sample_period();
    const double tau_hi = std::nextafter(cfg.max_delay(), 0.0);
    MpcParamSet theta;
    theta.mpcs.resize(weights.model_order);
    for (std::size_t l = 0; l < weights.model_order; ++l)
    {
        Mpc &p = theta.mpcs[l];
        p.tau = std::clamp(raw[3 * l] * ts, 0.0, tau_hi);
        p.alpha = std::max(raw[3 * l + 1], 0.0);
        p.phi = wrap_phase(raw[3 * l + 2] * pi);
    }
    sort_by_delay(theta);
    return theta;
}

PeakPickResult peak_pick_init(const ProfiledCir &profile, std::size_t model_order, const SystemConfig &cfg)
{
    if (model_order < 1)
        throw DomainError("peak_pick_init: model order must be >= 1");
    PeakPickResult res;
    res.theta.t_index = profile.t_index;
    const std::vector<double> &p = profile.samples;
    const std::size_t n = p.size();

    const bool all_zero = std::none_of(p.begin(), p.end(), [](double v) { return v > 0.0; });
    if (all_zero)
    {
        res.theta.mpcs.assign(model_order, Mpc{});
        res.padded = true;
        res.degenerate = true;
        return res;
    }

    std::vector<std::size_t> peaks;
    for (std::size_t k = 0; k < n; ++k)
    {
        const bool left = k == 0 || p[k] > p[k - 1];
        const bool right = k + 1 == n || p[k] >= p[k + 1];
        if (p[k] > 0.0 && left && right)
            peaks.push_back(k);
    }
    auto by_magnitude = [&](std::size_t a, std::size_t b) { return p[a] != p[b] ? p[a] > p[b] : a < b; };
    std::stable_sort(peaks.begin(), peaks.end(), by_magnitude);

    const auto spacing = static_cast<std::size_t>(std::max(1, cfg.n_st / 2));
    std::vector<std::size_t> chosen;
    for (const std::size_t k : peaks)
    {
        if (chosen.size() == model_order)
            break;
        const bool clear = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
            return (k > c ? k - c : c - k) >= spacing;
        });
        if (clear)
            chosen.push_back(k);
    }

    if (chosen.size() < model_order)
    {
        res.padded = true;
        std::vector<std::size_t> rest(n);
        std::iota(rest.begin(), rest.end(), std::size_t{0});
        std::stable_sort(rest.begin(), rest.end(), by_magnitude);
        for (const std::size_t k : rest)
        {
            if (chosen.size() == model_order)
                break;
            if (std::find(chosen.begin(), chosen.end(), k) == chosen.end())
                chosen.push_back(k);
        }
    }

    const double tau_hi = std::nextafter(cfg.max_delay(), 0.0);
    for (const std::size_t k : chosen)
        res.theta.mpcs.push_back({std::min(cfg.tap_delay(k + 1), tau_hi), p[k], 0.0});
    sort_by_delay(res.theta);
    return res;
}

} // namespace mpcprof
