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

#include "mpcprof/channel_model.hpp"

#include "mpcprof/errors.hpp"
#include "mpcprof/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpcprof
{

ChannelTensor::ChannelTensor(std::size_t n_t, std::size_t m, std::size_t i)
    : n_t_(n_t), m_(m), i_(i), data_(n_t * m * i, cdouble{0.0, 0.0})
{
}

Eigen::VectorXcd steering_vector(double angle, int n_elems, double spacing_wavelengths)
{
    Eigen::VectorXcd v(n_elems);
    const double step = two_pi * spacing_wavelengths * std::sin(angle);
    for (int k = 0; k < n_elems; ++k)
        v(k) = std::polar(1.0, step * k);
    return v;
}

namespace
{

Eigen::VectorXcd beam_weights(std::size_t i_v, std::size_t i_h, const SystemConfig &cfg)
{
    const Eigen::VectorXcd vv = steering_vector(cfg.tilt_angles[i_v], cfg.n1, cfg.d_v);
    const Eigen::VectorXcd vh = steering_vector(cfg.azimuth_angles[i_h], cfg.n2, cfg.d_h);
    Eigen::VectorXcd w(cfg.n_t());
    for (int c = 0; c < cfg.n2; ++c)
        for (int r = 0; r < cfg.n1; ++r)
            w(c * cfg.n1 + r) = vh(c) * vv(r);
    return w;
}

void check_shape(const ChannelTensor &h, const SystemConfig &cfg)
{
    if (h.n_t() != static_cast<std::size_t>(cfg.n_t()))
        throw ConfigError("beamform: tensor has " + std::to_string(h.n_t()) + " antennas, config expects " +
                          std::to_string(cfg.n_t()));
}

} // namespace

BeamformedChannel beamform(const ChannelTensor &h, std::size_t i_v, std::size_t i_h, const SystemConfig &cfg)
{
    check_shape(h, cfg);
    if (i_v >= cfg.tilt_angles.size() || i_h >= cfg.azimuth_angles.size())
        throw ConfigError("beamform: beam index outside configured angle sets");

    const Eigen::VectorXcd w = beam_weights(i_v, i_h, cfg);
    BeamformedChannel out;
    out.beam = {i_v, i_h};
    out.h.resize(static_cast<Eigen::Index>(h.m()), static_cast<Eigen::Index>(h.i()));
    for (std::size_t t = 0; t < h.i(); ++t)
        for (std::size_t f = 0; f < h.m(); ++f)
        {
            cdouble acc{0.0, 0.0};
            for (std::size_t a = 0; a < h.n_t(); ++a)
                acc += h(a, f, t) * w(static_cast<Eigen::Index>(a));
            out.h(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) = acc;
        }
    return out;
}

BeamIndex select_strongest_beam(const ChannelTensor &h, const SystemConfig &cfg)
{
    check_shape(h, cfg);
    BeamIndex best;
    double best_power = -1.0;
    for (std::size_t iv = 0; iv < cfg.tilt_angles.size(); ++iv)
        for (std::size_t ih = 0; ih < cfg.azimuth_angles.size(); ++ih)
        {
            const double p = beamform(h, iv, ih, cfg).h.cwiseAbs2().mean();
            if (p > best_power)
            {
                best_power = p;
                best = {iv, ih};
            }
        }
    return best;
}

Eigen::VectorXcd synth_freq_response(const MpcParamSet &theta, const SystemConfig &cfg)
{
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(cfg.m_prb);
    for (const Mpc &p : theta.mpcs)
    {
        const cdouble c = std::polar(p.alpha, p.phi);
        for (int m = 0; m < cfg.m_prb; ++m)
            h(m) += c * std::polar(1.0, -two_pi * (m * cfg.csi_rs_spacing) * p.tau);
    }
    return h;
}

ChannelTensor synth_channel_tensor(const MpcParamSet &theta, const std::vector<PathGeometry> &geometry,
                                   const SystemConfig &cfg, std::size_t n_instants, double cadence_s)
{
    if (geometry.size() != theta.size())
        throw DomainError("synth_channel_tensor: one geometry entry per path required");
    const auto n_t = static_cast<std::size_t>(cfg.n_t());
    const auto m = static_cast<std::size_t>(cfg.m_prb);
    ChannelTensor h(n_t, m, n_instants);

    for (std::size_t l = 0; l < theta.size(); ++l)
    {
        const Mpc &p = theta.mpcs[l];
        const PathGeometry &g = geometry[l];
        const Eigen::VectorXcd vv = steering_vector(g.elevation, cfg.n1, cfg.d_v);
        const Eigen::VectorXcd vh = steering_vector(g.azimuth, cfg.n2, cfg.d_h);
        const Eigen::VectorXcd freq = synth_freq_response(MpcParamSet{{{p.tau, p.alpha, p.phi}}, 0}, cfg);
        for (std::size_t t = 0; t < n_instants; ++t)
        {
            const cdouble dop = std::polar(1.0, two_pi * g.doppler_hz * cadence_s * static_cast<double>(t));
            for (std::size_t f = 0; f < m; ++f)
            {
                const cdouble ft = freq(static_cast<Eigen::Index>(f)) * dop;
                for (int c = 0; c < cfg.n2; ++c)
                    for (int r = 0; r < cfg.n1; ++r)
                        h(static_cast<std::size_t>(c * cfg.n1 + r), f, t) += ft * std::conj(vh(c) * vv(r));
            }
        }
    }
    return h;
}

void DatasetSpec::validate(const SystemConfig &cfg) const
{
    if (n_channels < 1)
        throw ConfigError("dataset: n_channels must be >= 1");
    const double upper = static_cast<double>(cfg.m_prb);
    if (!(delay_min >= 0.0) || !(delay_max > delay_min) || !(delay_max < upper))
        throw ConfigError("dataset: delay_range must satisfy 0 <= min < max < m_prb (in units of T_s)");
    if (!(phase_max >= phase_min))
        throw ConfigError("dataset: phase_range must be ascending");
    if (model_order_min < 1 || model_order_max < model_order_min)
        throw ConfigError("dataset: model_order_range must satisfy 1 <= L_min <= L_max");
    if (min_separation < 0.0)
        throw ConfigError("dataset: min_separation must be >= 0");
}

std::mt19937_64 channel_rng(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

std::vector<cdouble> band_limited_noise(const std::vector<cdouble> &clean_cir, const Eigen::VectorXcd &freq_response,
                                        const SystemConfig &cfg, double snr_db, std::mt19937_64 &rng)
{
    const auto m = static_cast<std::size_t>(freq_response.size());
    std::vector<cdouble> noise(clean_cir.size(), cdouble{0.0, 0.0});
    const double p_freq = freq_response.cwiseAbs2().mean();
    double p_cir = 0.0;
    for (const cdouble &z : clean_cir)
        p_cir += std::norm(z);
    p_cir /= static_cast<double>(std::max<std::size_t>(clean_cir.size(), 1));
    if (!(p_freq > 0.0) || m == 0)
        return noise;

    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    const double sigma2 = p_freq / snr_lin;
    std::normal_distribution<double> nd(0.0, std::sqrt(sigma2 / 2.0));
    std::vector<cdouble> n_freq(m);
    for (auto &z : n_freq)
    {
        const double re = nd(rng);
        const double im = nd(rng);
        z = {re, im};
    }

    const double gain = std::sqrt(static_cast<double>(m) * p_cir / p_freq) / static_cast<double>(m);
    const double centre = 0.5 * static_cast<double>(m - 1);
    for (std::size_t k = 0; k < noise.size(); ++k)
    {
        const double t = cfg.tap_delay(k + 1);
        cdouble acc{0.0, 0.0};
        for (std::size_t f = 0; f < m; ++f)
            acc += n_freq[f] * std::polar(1.0, two_pi * (static_cast<double>(f) - centre) * cfg.csi_rs_spacing * t);
        noise[k] = gain * acc;
    }
    return noise;
}

DatasetEntry generate_channel(const DatasetSpec &spec, const SystemConfig &cfg, std::size_t index)
{
    auto rng = channel_rng(spec.rng_seed, index);
    const double ts = cfg.sample_period();

    std::uniform_int_distribution<int> order(spec.model_order_min, spec.model_order_max);
    const int n_paths = order(rng);

    // Uniform draw over the separation-constrained region: sort L uniforms on
    // the shrunken interval, then spread them by k * separation.
    const double lo = spec.delay_min * ts;
    const double hi = spec.delay_max * ts;
    const double sep = spec.min_separation * ts;
    const double room = (hi - lo) - (n_paths - 1) * sep;
    if (room < 0.0)
        throw GenerationError("dataset: " + std::to_string(n_paths) + " paths cannot keep a separation of " +
                              std::to_string(spec.min_separation) + " T_s inside the delay range");
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<double> taus(static_cast<std::size_t>(n_paths));
    for (double &t : taus)
        t = lo + room * ud(rng);
    std::sort(taus.begin(), taus.end());
    for (std::size_t l = 0; l < taus.size(); ++l)
        taus[l] += static_cast<double>(l) * sep;

    std::uniform_real_distribution<double> phase(spec.phase_min, spec.phase_max);
    std::exponential_distribution<double> amp(1.0);

    DatasetEntry e;
    e.theta.t_index = 0;
    e.theta.mpcs.resize(taus.size());
    for (std::size_t l = 0; l < taus.size(); ++l)
        e.theta.mpcs[l].tau = taus[l];
    for (Mpc &p : e.theta.mpcs)
        p.phi = wrap_phase(phase(rng));
    double a_max = 0.0;
    for (Mpc &p : e.theta.mpcs)
    {
        p.alpha = amp(rng);
        a_max = std::max(a_max, p.alpha);
    }
    const double a_floor = spec.amplitude_spread_db ? std::pow(10.0, -*spec.amplitude_spread_db / 20.0) : 0.0;
    for (Mpc &p : e.theta.mpcs)
        p.alpha = std::max(p.alpha / a_max, a_floor);

    if (spec.on_lattice)
    {
        const QuantizerSpec q = QuantizerSpec::defaults(cfg);
        for (Mpc &p : e.theta.mpcs)
        {
            p.tau = q.delay(p.tau);
            p.alpha = std::max(q.amplitude(p.alpha), q.amp_step);
            p.phi = wrap_phase(q.phase(p.phi));
        }
    }

    const ComplexCir full = sample_cir(e.theta, cfg);
    e.cir.t_index = 0;
    e.cir.samples.assign(full.samples.begin(), full.samples.begin() + cfg.obs_window_w);
    if (spec.snr_db)
    {
        const auto noise = band_limited_noise(e.cir.samples, synth_freq_response(e.theta, cfg), cfg, *spec.snr_db, rng);
        for (std::size_t k = 0; k < noise.size(); ++k)
            e.cir.samples[k] += noise[k];
    }
    e.profile = profile(e.cir);
    return e;
}

std::vector<DatasetEntry> generate_dataset(const DatasetSpec &spec, const SystemConfig &cfg, unsigned workers)
{
    cfg.validate();
    spec.validate(cfg);
    std::vector<DatasetEntry> out(spec.n_channels);
    parallel_for(out.size(), workers, [&](std::size_t k) { out[k] = generate_channel(spec, cfg, k); });
    return out;
}

} // namespace mpcprof
