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

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace mpcprof
{

/// Natural cubic spline through (x_i, y_i); outside the knots the first and
/// last cubic pieces are continued.
class NaturalCubicSpline
{
public:
    // Throws DomainError with fewer than 2 knots or non-increasing x.
    NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_; // second derivatives at the knots
};

struct ParameterTrack
{
    std::vector<double> t; // observation instants
    std::vector<double> tau;
    std::vector<double> alpha;
    std::vector<double> phi; // unwrapped
};

struct ParameterTrackSet
{
    std::vector<ParameterTrack> tracks;
    double t_ob = 0.0;
};

enum class Association
{
    tracked_identity, // component l of every estimate is the same path
    nearest_delay,    // greedy matching against linearly predicted delays
};

// Estimates are ordered in time (strictly increasing t_index); all must hold
// the same number of components.
ParameterTrackSet fit_tracks(const std::vector<MpcParamSet> &estimates, Association association);

// Phase sequence made continuous: consecutive differences mapped into (-pi, pi].
std::vector<double> unwrap_phases(const std::vector<double> &phi);

// Spline evaluation of every parameter of every track at t_target (> 0).
// Amplitudes are clamped at 0; phases stay unwrapped.
MpcParamSet extrapolate(const ParameterTrackSet &tracks, double t_target);

// Reconstruction of the extrapolated parameters; delays are clamped into
// [0, M T_s). n_taps = 0 selects the observation window W.
ProfiledCir predict_csi(const ParameterTrackSet &tracks, double t_target, const SystemConfig &cfg,
                        const QuantizerSpec &q, const SincBank &bank, std::size_t n_taps = 0);

struct HorizonRow
{
    int t_index = 0;
    double loss_db = 0.0;
    bool model_violation = false; // loss above horizon_violation_db
};

inline constexpr double horizon_violation_db = -10.0;

// Per-instant profiling loss of predicted against true profiles; the t_index
// of each row is taken from the truth profile.
std::vector<HorizonRow> evaluate_horizon(const std::vector<ProfiledCir> &truth,
                                         const std::vector<ProfiledCir> &predicted);

// CSV with header "t_index,t_ms,loss_db".
void write_horizon_csv(std::ostream &os, const std::vector<HorizonRow> &rows, double cadence_s);

} // namespace mpcprof
