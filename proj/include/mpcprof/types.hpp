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

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace mpcprof
{

using cdouble = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double deg2rad(double deg) { return deg * pi / 180.0; }

// Wraps an angle into [0, 2*pi).
double wrap_phase(double phi);

// Wraps an angle into (-pi, pi].
double wrap_pi(double phi);

/// System and array configuration of the massive MIMO OFDM link.
///
/// Taps of the oversampled delay grid are numbered from 1; tap k sits at
/// delay k * tap_spacing() with tap_spacing() = T_s / n_st and T_s = 1 / B.
struct SystemConfig
{
    int n_sc = 600;                 // subcarriers
    int m_prb = 50;                 // CSI-RS samples M (one per PRB)
    double csi_rs_spacing = 180e3;  // Hz
    int n1 = 4;                     // URA rows (vertical)
    int n2 = 16;                    // URA columns (horizontal)
    double d_v = 0.7;               // vertical spacing in wavelengths
    double d_h = 0.5;               // horizontal spacing in wavelengths
    double carrier_wavelength = 0.14;
    double bandwidth_b = 10e6;      // single-sided, Hz
    int n_st = 6;                   // oversampling factor
    std::vector<double> tilt_angles{deg2rad(7.0), deg2rad(12.0)};
    std::vector<double> azimuth_angles{deg2rad(-45.0), deg2rad(-15.0), deg2rad(15.0), deg2rad(45.0)};
    int obs_window_w = 256;         // taps

    double sample_period() const { return 1.0 / bandwidth_b; }
    double tap_spacing() const { return sample_period() / n_st; }
    double tap_delay(std::size_t tap) const { return static_cast<double>(tap) * tap_spacing(); }
    std::size_t grid_length() const { return static_cast<std::size_t>(m_prb) * static_cast<std::size_t>(n_st); }
    double max_delay() const { return m_prb * sample_period(); }
    int n_t() const { return n1 * n2; }

    // Throws ConfigError when an invariant is violated.
    void validate() const;
};

struct Mpc
{
    double tau = 0.0;   // seconds
    double alpha = 0.0; // linear amplitude
    double phi = 0.0;   // radians

    bool operator==(const Mpc &) const = default;
};

/// Parameter set of L multipath components at one observation instant.
///
/// Canonical sets (generator, initial estimates) are ordered by delay.
/// Sets produced by tracking keep the index identity of their predecessor
/// and may therefore be out of delay order when paths cross.
struct MpcParamSet
{
    std::vector<Mpc> mpcs;
    int t_index = 0;

    std::size_t size() const { return mpcs.size(); }
    bool operator==(const MpcParamSet &) const = default;
};

// Checks L >= 1, alpha >= 0, phi in [0, 2pi), tau in [0, M*T_s) and, when
// require_sorted is set, non-decreasing delays. Throws DomainError.
void validate(const MpcParamSet &theta, const SystemConfig &cfg, bool require_sorted = true);

void sort_by_delay(MpcParamSet &theta);

// Wraps phases, clamps amplitudes at zero.
void normalize(MpcParamSet &theta);

struct ComplexCir
{
    std::vector<cdouble> samples;
    int t_index = 0;
};

struct ProfiledCir
{
    std::vector<double> samples;
    int t_index = 0;

    std::size_t size() const { return samples.size(); }
};

} // namespace mpcprof
