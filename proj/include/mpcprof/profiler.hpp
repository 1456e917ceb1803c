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

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace mpcprof
{

/// Step sizes of the parameter quantizer applied before reconstruction.
struct QuantizerSpec
{
    double delay_step = 0.0; // seconds
    double amp_step = 1e-3;
    double phase_step = two_pi / 4096.0;

    // delay_step = T_s / (64 * n_st), aligned with the default sinc bank.
    static QuantizerSpec defaults(const SystemConfig &cfg);

    void validate() const;

    double delay(double tau) const;
    double amplitude(double alpha) const;
    double phase(double phi) const;
};

/// Precomputed normalized sinc, sinc(x) = sin(pi x) / (pi x), sampled on a
/// fine delay grid and read out with linear interpolation.
///
/// Readouts whose offset is a multiple of the resolution hit table entries
/// exactly. Elsewhere the error is bounded by interpolation_bound().
class SincBank
{
public:
    // resolution_s <= 0 selects T_s / (64 * n_st).
    explicit SincBank(const SystemConfig &cfg, double resolution_s = 0.0);

    double resolution() const { return resolution_; }
    double span() const { return span_; }
    std::size_t half_size() const { return half_; }

    // Table entry at signed index k, |k| <= half_size().
    double entry(long k) const { return table_[static_cast<std::size_t>(k + static_cast<long>(half_))]; }

    // sinc(offset * B). Throws DomainError when |offset| > span().
    double operator()(double offset_s) const;

    // Worst-case linear interpolation error: h^2 / 8 * max|sinc''| with
    // max|sinc''| = pi^2 / 3 and h the resolution in units of T_s.
    double interpolation_bound() const;

    // Bound used by tests and acceptance for bank vs analytic readouts.
    static constexpr double declared_bound = 1e-6;

private:
    double bandwidth_;
    double resolution_;
    double inv_resolution_;
    double span_;
    std::size_t half_;
    std::vector<double> table_;
};

double sinc(double x);

// Exact band-limited CIR on the grid t_s (grid_length() taps, no quantization).
ComplexCir sample_cir(const MpcParamSet &theta, const SystemConfig &cfg);

ProfiledCir profile(const ComplexCir &cir);

// Quantized discrete reconstruction evaluated through the sinc bank. The
// first n_taps taps of the extended grid are returned; n_taps == 0 selects
// grid_length(), where the extended grid coincides with t_s.
ProfiledCir reconstruct(const MpcParamSet &theta_hat, const SystemConfig &cfg, const QuantizerSpec &q,
                        const SincBank &bank, std::size_t n_taps = 0);

// Complex response of one quantized path over taps [first_tap, first_tap + n)
// (1-based tap numbering), unit amplitude and zero phase.
void path_response(double tau_quantized, const SystemConfig &cfg, const SincBank &bank, std::size_t first_tap,
                   std::size_t n, std::vector<double> &out);

// Sum of squared differences over taps [w_start, w_stop], 1-based inclusive.
double window_error(const ProfiledCir &a, const ProfiledCir &b, std::size_t w_start, std::size_t w_stop);

// ||truth - recon||^2 / ||truth||^2.
double profiling_loss(const ProfiledCir &truth, const ProfiledCir &recon);

inline constexpr double loss_db_floor = -120.0;

// 10 log10(loss) clamped at loss_db_floor.
double loss_to_db(double loss);

// Zeroes every sample below 3 * noise_floor_estimate.
ProfiledCir denoise_threshold(const ProfiledCir &cir, double noise_floor_estimate);

// Median magnitude of the profile, a crude floor estimate for denoise_threshold.
double median_floor(const ProfiledCir &cir);

// Debug dump: tap_index,delay_s,magnitude
void write_cir_csv(std::ostream &os, const ProfiledCir &cir, const SystemConfig &cfg);

} // namespace mpcprof
