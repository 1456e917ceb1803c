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

#include "mpcprof/channel_model.hpp"
#include "mpcprof/weight_bundle.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace mpcprof
{

/// Singular values of each mode unfolding of a channel tensor.
struct ModeSingularValues
{
    std::vector<std::vector<double>> sigma; // one non-increasing vector per mode
    std::vector<std::size_t> tensor_shape;  // (antenna, frequency, time)
    bool degenerate = false;                // all-zero tensor
};

// Mode d unfolding uses the cyclic ordering: rows follow mode d, columns
// follow modes d+1, d+2 (mod 3) with the first of them varying fastest.
Eigen::MatrixXcd unfold(const ChannelTensor &h, std::size_t mode);

// Throws DomainError on an empty tensor.
ModeSingularValues hosvd_singular_values(const ChannelTensor &h);

// Per mode, count values above noise_floor_db (20 log10 relative to the
// mode's largest); L is the median of those counts (lower median for an even
// number of modes), at least 1. An empty mode list selects every mode.
std::size_t select_model_order(const ModeSingularValues &sv, double noise_floor_db,
                               const std::vector<std::size_t> &modes = {});

inline constexpr std::size_t model_order_features_per_mode = 8;

// Per mode, the top 8 singular values divided by the mode's largest (zero
// padded), concatenated in mode order.
std::vector<double> model_order_features(const ModeSingularValues &sv, const std::vector<std::size_t> &modes = {});

void write_features_csv_header(std::ostream &os, std::size_t n_modes);
void write_features_csv_row(std::ostream &os, const std::vector<double> &features, std::size_t label);

// 1 + argmax of a dense classifier; throws FormatError on a shape mismatch.
std::size_t nn_model_order(const ModeSingularValues &sv, const WeightBundle &weights,
                           const std::vector<std::size_t> &modes = {});

struct ModelOrderCaseSpec
{
    DatasetSpec paths; // delays, amplitudes, model order; snr_db adds white tensor noise
    std::size_t n_instants = 16;
    double cadence_s = 0.5e-3;
    double doppler_max_hz = 400.0; // Doppler drawn uniformly in [-max, max]
    double elevation_max = 0.5;    // rad, drawn uniformly in [-max, max]
    double azimuth_max = 1.0;      // rad, drawn uniformly in [-max, max]
};

struct ModelOrderCase
{
    ChannelTensor tensor;
    std::size_t true_order = 0;
};

// Deterministic in (spec.paths.rng_seed, index).
ModelOrderCase synth_model_order_case(const ModelOrderCaseSpec &spec, const SystemConfig &cfg, std::size_t index);

} // namespace mpcprof
