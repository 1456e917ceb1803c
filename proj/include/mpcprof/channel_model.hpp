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

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace mpcprof
{

/// Frequency-domain channel H of shape (n_t, m, i): antenna x frequency x time.
///
/// Antennas are indexed with the vertical element fastest, n = n2 * N1 + n1,
/// which matches the Kronecker product v_h (x) v_v.
class ChannelTensor
{
public:
    ChannelTensor() = default;
    ChannelTensor(std::size_t n_t, std::size_t m, std::size_t i);

    std::size_t n_t() const { return n_t_; }
    std::size_t m() const { return m_; }
    std::size_t i() const { return i_; }
    bool empty() const { return data_.empty(); }

    cdouble &operator()(std::size_t a, std::size_t f, std::size_t t) { return data_[a + n_t_ * (f + m_ * t)]; }
    const cdouble &operator()(std::size_t a, std::size_t f, std::size_t t) const
    {
        return data_[a + n_t_ * (f + m_ * t)];
    }

    const std::vector<cdouble> &data() const { return data_; }
    std::vector<cdouble> &data() { return data_; }

private:
    std::size_t n_t_ = 0;
    std::size_t m_ = 0;
    std::size_t i_ = 0;
    std::vector<cdouble> data_;
};

struct BeamIndex
{
    std::size_t i_v = 0;
    std::size_t i_h = 0;

    bool operator==(const BeamIndex &) const = default;
};

struct BeamformedChannel
{
    Eigen::MatrixXcd h; // M x I
    BeamIndex beam;
};

// Element k (0-based) is exp(j 2 pi k spacing sin(angle)).
Eigen::VectorXcd steering_vector(double angle, int n_elems, double spacing_wavelengths);

// output(m, i) = H(., m, i)^T (v_h (x) v_v). Throws ConfigError on shape mismatch.
BeamformedChannel beamform(const ChannelTensor &h, std::size_t i_v, std::size_t i_h, const SystemConfig &cfg);

// Strongest beam by mean |.|^2; ties go to the lowest (i_v, i_h).
BeamIndex select_strongest_beam(const ChannelTensor &h, const SystemConfig &cfg);

// Sample m (0-based) at f_m = m * csi_rs_spacing.
Eigen::VectorXcd synth_freq_response(const MpcParamSet &theta, const SystemConfig &cfg);

/// Spatial and temporal signature of one path, used to build full tensors.
struct PathGeometry
{
    double elevation = 0.0; // radians, drives the vertical steering
    double azimuth = 0.0;   // radians, drives the horizontal steering
    double doppler_hz = 0.0;
};

// H(n, m, i) = sum_l alpha_l e^{j phi_l} conj(a_n(l)) e^{-j 2 pi f_m tau_l} e^{j 2 pi nu_l t_i}
// with t_i = i * cadence_s. conj(a) is matched by the beamformer of the same angles.
ChannelTensor synth_channel_tensor(const MpcParamSet &theta, const std::vector<PathGeometry> &geometry,
                                   const SystemConfig &cfg, std::size_t n_instants, double cadence_s);

struct DatasetSpec
{
    std::size_t n_channels = 15000;
    double delay_min = 0.15; // multiples of T_s
    double delay_max = 5.0;
    double phase_min = 0.0;
    double phase_max = two_pi;
    int model_order_min = 1;
    int model_order_max = 3;
    double min_separation = 0.5; // multiples of T_s
    std::optional<double> snr_db;
    // When set, amplitudes below -spread dB (relative to the strongest) are
    // raised to that level.
    std::optional<double> amplitude_spread_db;
    // Snap drawn parameters onto the default quantizer lattice.
    bool on_lattice = false;
    std::uint64_t rng_seed = 1;

    void validate(const SystemConfig &cfg) const;
};

struct DatasetEntry
{
    MpcParamSet theta;
    ComplexCir cir;      // first W taps, noisy when snr_db is set
    ProfiledCir profile; // |cir|
};

// One channel, drawn from the stream derived from (seed, index).
DatasetEntry generate_channel(const DatasetSpec &spec, const SystemConfig &cfg, std::size_t index);

// Deterministic for a given spec; channels may be generated by `workers` threads.
std::vector<DatasetEntry> generate_dataset(const DatasetSpec &spec, const SystemConfig &cfg, unsigned workers = 1);

// Frequency-domain white noise at the requested SNR, mapped onto the delay
// grid and scaled so that the CIR-domain SNR equals snr_db.
std::vector<cdouble> band_limited_noise(const std::vector<cdouble> &clean_cir, const Eigen::VectorXcd &freq_response,
                                        const SystemConfig &cfg, double snr_db, std::mt19937_64 &rng);

// Independent stream per (seed, index).
std::mt19937_64 channel_rng(std::uint64_t seed, std::uint64_t index);

} // namespace mpcprof
