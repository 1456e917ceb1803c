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

#include "mpcprof/types.hpp"
#include "mpcprof/weight_bundle.hpp"

#include <cstddef>
#include <vector>

namespace mpcprof
{

/// W x 2 network input: column 0 magnitudes, column 1 principal phases.
struct NnInput
{
    std::size_t window = 0;
    std::vector<double> values; // row-major (tap, channel)

    double magnitude(std::size_t tap) const { return values[2 * tap]; }
    double phase(std::size_t tap) const { return values[2 * tap + 1]; }
};

// First W taps as (|h|, arg h) with arg in (-pi, pi]; zero taps get phase 0.
NnInput prepare_input(const ComplexCir &cir, const SystemConfig &cfg);

// Runs the start-parameter network and decodes L triples encoded as
// (tau / T_s, alpha, phi / pi). Delays are clamped into [0, M*T_s),
// amplitudes at zero, phases wrapped; the result is sorted by delay.
MpcParamSet nn_infer(const NnInput &input, const WeightBundle &weights, const SystemConfig &cfg);

struct PeakPickResult
{
    MpcParamSet theta;
    bool padded = false;     // fewer than L local maxima were found
    bool degenerate = false; // all-zero profile
};

// The L largest local maxima with a mutual spacing of at least n_st / 2
// taps. tau from the tap delay, alpha from the magnitude, phi = 0.
PeakPickResult peak_pick_init(const ProfiledCir &profile, std::size_t model_order, const SystemConfig &cfg);

} // namespace mpcprof
