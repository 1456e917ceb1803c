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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mpcprof
{

enum class SearchLevel : int
{
    coarse = 0,
    medium = 1,
    fine = 2,
};

const char *to_string(SearchLevel level);

struct SearchSteps
{
    double tau = 0.0; // seconds
    double alpha = 0.0;
    double phi = 0.0; // radians
};

/// Step sizes per search level plus iteration controls.
///
/// Defaults: coarse (T_s/4, 0.05, pi/8), medium (T_s/24, 0.01, pi/64) and a
/// fine level equal to the default quantizer steps, so that the fine search
/// can reach every point of the reconstruction lattice.
struct SearchSchedule
{
    std::array<SearchSteps, 3> steps{};
    int max_iterations_per_level = 200;
    double convergence_tol = 1e-6;
    double tracking_radius = 8.0; // multiples of the medium-level steps
    std::size_t w_start = 1;
    std::size_t w_stop = 0;       // 0: observation window W
    std::size_t max_model_order = 16;
    double track_lost_db = -10.0;
    double track_energy_floor = 1e-24;

    static SearchSchedule defaults(const SystemConfig &cfg);

    // "standard" (defaults) or "fast": (T_s/2, 0.1, pi/8), (T_s/8, 0.02,
    // pi/32), (T_s/32, 0.005, pi/128). Throws UsageError otherwise.
    static SearchSchedule preset(const std::string &name, const SystemConfig &cfg);

    const SearchSteps &at(SearchLevel level) const { return steps[static_cast<std::size_t>(level)]; }

    // Throws ConfigError on non-positive or non-monotone steps.
    void validate(const QuantizerSpec &q) const;
};

struct EstimateReport
{
    MpcParamSet theta_hat;
    double loss_db = 0.0;
    std::array<int, 3> iterations_used{}; // coarse, medium, fine
    double elapsed_s = 0.0;
    std::vector<bool> degenerate;         // amplitude below one quantizer step
    bool seed_padded = false;             // initializer found fewer peaks than L
    bool track_lost = false;              // tracking loss above track_lost_db
};

/// Read-only state shared by all estimator calls.
struct EstimatorContext
{
    const SystemConfig &cfg;
    const QuantizerSpec &q;
    const SincBank &bank;
    const SearchSchedule &schedule;
};

// One sweep: every component, strongest first, picks the best of its 27
// {-, 0, +} variations of (tau, alpha, phi) under the windowed error. The
// zero variation wins ties, so the windowed error never increases.
MpcParamSet refine(const MpcParamSet &theta, const ProfiledCir &target, SearchLevel level, const EstimatorContext &ctx);

// Full search: seed (peak picking unless given), then coarse, medium and fine
// levels until convergence. Result is sorted by delay.
EstimateReport estimate_initial(const ProfiledCir &target, std::size_t model_order, const EstimatorContext &ctx,
                                const std::optional<MpcParamSet> &seed = std::nullopt);

// Relative tracking from prev: medium and fine levels, every parameter
// confined to +/- tracking_radius medium steps around prev. Path identity is
// preserved. Throws TrackLostError when the target carries no energy.
EstimateReport track(const MpcParamSet &prev, const ProfiledCir &target_next, const EstimatorContext &ctx);

// Windowed error of the reconstruction of theta against target.
double windowed_score(const MpcParamSet &theta, const ProfiledCir &target, const EstimatorContext &ctx);

} // namespace mpcprof
