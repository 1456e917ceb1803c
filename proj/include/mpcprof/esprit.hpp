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

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace mpcprof
{

struct EspritConfig
{
    std::size_t subarray_length = 0; // 0: floor(2M / 3)
    bool use_forward_backward = true;
    std::size_t model_order = 1;

    static EspritConfig defaults(const SystemConfig &sys, std::size_t model_order);

    std::size_t resolved_subarray(std::size_t m) const;

    // Throws ConfigError unless model_order < subarray_length < m.
    void validate(std::size_t m) const;
};

// Delays (seconds, ascending, folded into [0, 1 / csi_rs_spacing)) of the
// model_order strongest exponentials in freq_response, whose sample m sits at
// m * csi_rs_spacing. Forward-backward averaging selects the real-valued
// (unitary) formulation; without it the complex shift-invariance equation is
// solved directly. Throws EstimationError when the signal subspace has rank
// below model_order.
std::vector<double> esprit_delays(const Eigen::VectorXcd &freq_response, const EspritConfig &cfg,
                                  const SystemConfig &sys);

struct LsAmpPhase
{
    MpcParamSet theta;
    double condition_number = 0.0;
    bool ill_conditioned = false; // condition number above ls_condition_limit
};

inline constexpr double ls_condition_limit = 1e10;

// Least-squares amplitudes and phases for fixed delays.
LsAmpPhase ls_amp_phase(const std::vector<double> &delays, const Eigen::VectorXcd &freq_response,
                        const SystemConfig &sys);

// Left-Pi-real unitary matrix of order n.
Eigen::MatrixXcd unitary_q(std::size_t n);

} // namespace mpcprof
