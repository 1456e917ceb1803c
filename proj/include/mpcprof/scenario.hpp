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

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mpcprof
{

enum class LawKind
{
    constant,
    linear,
    quadratic,
    sinusoidal,
};

/// Evolution of one parameter over the instant index t:
/// constant c0; linear c0 + c1 t; quadratic c0 + c1 t + c2 t^2;
/// sinusoidal c0 + amplitude sin(2 pi t / period + offset).
struct ParameterLaw
{
    LawKind kind = LawKind::constant;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double amplitude = 0.0;
    double period = 1.0;
    double offset = 0.0;

    double operator()(double t) const;
};

struct PathLaw
{
    ParameterLaw tau;   // multiples of T_s
    ParameterLaw alpha; // linear amplitude
    ParameterLaw phi;   // radians
};

struct Scenario
{
    std::string name;
    double cadence_s = 2e-3;
    std::uint64_t seed = 1;
    bool on_lattice = false; // snap parameters onto the quantizer lattice
    std::vector<PathLaw> paths;

    // Throws ConfigError on an empty path list or a non-positive cadence.
    void validate() const;
};

// Parameters at instant t: amplitudes clamped at 0, phases wrapped, and,
// for on_lattice scenarios, every parameter quantized with q.
MpcParamSet scenario_at(const Scenario &s, int t, const SystemConfig &cfg, const QuantizerSpec &q);

Scenario scenario_from_json(const nlohmann::json &j);
nlohmann::json to_json(const Scenario &s);

// Random well-separated start (delays in [delay_min, delay_max] T_s with
// pairwise separation >= min_separation T_s, amplitudes in [0.3, 1], uniform
// phases) shared by the built-in scenarios.
struct BuiltinOptions
{
    std::size_t n_paths = 2;
    double delay_min = 0.5;
    double delay_max = 3.5;
    double min_separation = 1.0;
    double delay_drift = 0.1;     // T_s per instant, linear-drift only
    double phase_drift_max = 0.1; // rad per instant, drawn per path
    double amplitude_drift = 0.0; // relative change per instant
    bool on_lattice = true;
};

Scenario static_scenario(std::uint64_t seed, const BuiltinOptions &opt = {});
Scenario linear_drift_scenario(std::uint64_t seed, const BuiltinOptions &opt = {});

// "static" or "linear-drift"; throws UsageError otherwise.
Scenario builtin_scenario(const std::string &name, std::uint64_t seed, const BuiltinOptions &opt = {});

} // namespace mpcprof
