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

#include "mpcprof/predictor.hpp"

#include "mpcprof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace mpcprof
{

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y))
{
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw DomainError("spline: need at least 2 knots with matching values");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw DomainError("spline: knots must be strictly increasing");

    // Tridiagonal system for the interior second derivatives (Thomas algorithm).
    m_.assign(n, 0.0);
    if (n == 2)
        return;
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i)
    {
        const double lower = x_[i + 1] - x_[i]; // h of the row's left neighbour
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;)
        m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
}

double NaturalCubicSpline::operator()(double t) const
{
    const std::size_t n = x_.size();
    std::size_t i = 0;
    if (t >= x_[n - 1])
        i = n - 2;
    else if (t > x_[0])
        i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

std::vector<double> unwrap_phases(const std::vector<double> &phi)
{
    std::vector<double> out(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k)
        out[k] = k == 0 ? phi[0] : out[k - 1] + wrap_pi(phi[k] - phi[k - 1]);
    return out;
}

ParameterTrackSet fit_tracks(const std::vector<MpcParamSet> &estimates, Association association)
{
    if (estimates.size() < 2)
        throw DomainError("fit_tracks: need at least 2 estimates");
    const std::size_t l = estimates.front().size();
    for (std::size_t k = 0; k < estimates.size(); ++k)
    {
        if (estimates[k].size() != l)
            throw DomainError("fit_tracks: estimate " + std::to_string(k) + " has " +
                              std::to_string(estimates[k].size()) + " components, expected " + std::to_string(l));
        if (k > 0 && !(estimates[k].t_index > estimates[k - 1].t_index))
            throw DomainError("fit_tracks: t_index must be strictly increasing");
    }

    ParameterTrackSet set;
    set.tracks.resize(l);
    std::vector<std::vector<double>> raw_phi(l);
    for (std::size_t k = 0; k < estimates.size(); ++k)
    {
        const auto &e = estimates[k].mpcs;
        std::vector<std::size_t> assign(l); // track -> component of estimate k
        for (std::size_t j = 0; j < l; ++j)
            assign[j] = j;
        if (association == Association::nearest_delay && k > 0)
        {
            std::vector<double> predicted(l);
            for (std::size_t j = 0; j < l; ++j)
            {
                const auto &tr = set.tracks[j];
                const std::size_t n = tr.tau.size();
                predicted[j] = tr.tau[n - 1];
                if (n >= 2)
                {
                    const double slope = (tr.tau[n - 1] - tr.tau[n - 2]) / (tr.t[n - 1] - tr.t[n - 2]);
                    predicted[j] += slope * (estimates[k].t_index - tr.t[n - 1]);
                }
            }
            std::vector<bool> track_done(l, false), comp_done(l, false);
            for (std::size_t round = 0; round < l; ++round)
            {
                double best = std::numeric_limits<double>::infinity();
                std::size_t bj = 0, bc = 0;
                for (std::size_t j = 0; j < l; ++j)
                    for (std::size_t c = 0; c < l; ++c)
                        if (!track_done[j] && !comp_done[c] && std::abs(predicted[j] - e[c].tau) < best)
                        {
                            best = std::abs(predicted[j] - e[c].tau);
                            bj = j;
                            bc = c;
                        }
                track_done[bj] = comp_done[bc] = true;
                assign[bj] = bc;
            }
        }
        for (std::size_t j = 0; j < l; ++j)
        {
            const Mpc &p = e[assign[j]];
            auto &tr = set.tracks[j];
            tr.t.push_back(static_cast<double>(estimates[k].t_index));
            tr.tau.push_back(p.tau);
            tr.alpha.push_back(p.alpha);
            raw_phi[j].push_back(p.phi);
        }
    }
    for (std::size_t j = 0; j < l; ++j)
        set.tracks[j].phi = unwrap_phases(raw_phi[j]);
    set.t_ob = static_cast<double>(estimates.back().t_index);
    return set;
}

MpcParamSet extrapolate(const ParameterTrackSet &tracks, double t_target)
{
    if (!(t_target > 0.0))
        throw DomainError("extrapolate: t_target must be positive");
    MpcParamSet out;
    out.t_index = static_cast<int>(std::lround(t_target));
    out.mpcs.reserve(tracks.tracks.size());
    for (const auto &tr : tracks.tracks)
    {
        if (tr.t.size() < 2)
            throw DomainError("extrapolate: a track needs at least 2 observations");
        Mpc p;
        p.tau = NaturalCubicSpline(tr.t, tr.tau)(t_target);
        p.alpha = std::max(0.0, NaturalCubicSpline(tr.t, tr.alpha)(t_target));
        p.phi = NaturalCubicSpline(tr.t, tr.phi)(t_target);
        out.mpcs.push_back(p);
    }
    return out;
}

ProfiledCir predict_csi(const ParameterTrackSet &tracks, double t_target, const SystemConfig &cfg,
                        const QuantizerSpec &q, const SincBank &bank, std::size_t n_taps)
{
    MpcParamSet theta = extrapolate(tracks, t_target);
    const double tau_max = std::nextafter(cfg.max_delay(), 0.0);
    for (Mpc &p : theta.mpcs)
        p.tau = std::clamp(p.tau, 0.0, tau_max);
    ProfiledCir out = reconstruct(theta, cfg, q, bank, n_taps == 0 ? static_cast<std::size_t>(cfg.obs_window_w) : n_taps);
    out.t_index = theta.t_index;
    return out;
}

std::vector<HorizonRow> evaluate_horizon(const std::vector<ProfiledCir> &truth,
                                         const std::vector<ProfiledCir> &predicted)
{
    if (truth.size() != predicted.size())
        throw DomainError("evaluate_horizon: " + std::to_string(truth.size()) + " truth vs " +
                          std::to_string(predicted.size()) + " predicted profiles");
    std::vector<HorizonRow> rows(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k)
    {
        rows[k].t_index = truth[k].t_index;
        rows[k].loss_db = loss_to_db(profiling_loss(truth[k], predicted[k]));
        rows[k].model_violation = rows[k].loss_db > horizon_violation_db;
    }
    return rows;
}

void write_horizon_csv(std::ostream &os, const std::vector<HorizonRow> &rows, double cadence_s)
{
    os << "t_index,t_ms,loss_db\n";
    const auto old = os.precision(10);
    for (const auto &r : rows)
        os << r.t_index << ',' << r.t_index * cadence_s * 1e3 << ',' << r.loss_db << '\n';
    os.precision(old);
}

} // namespace mpcprof
