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

#include "mpcprof/profiler.hpp"

#include "mpcprof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace mpcprof
{

namespace
{

double quantize(double v, double step) { return std::round(v / step) * step; }

} // namespace

QuantizerSpec QuantizerSpec::defaults(const SystemConfig &cfg)
{
    QuantizerSpec q;
    q.delay_step = cfg.sample_period() / (64.0 * cfg.n_st);
    return q;
}

void QuantizerSpec::validate() const
{
    if (!(delay_step > 0.0) || !(amp_step > 0.0) || !(phase_step > 0.0))
        throw ConfigError("quantizer: all steps must be > 0");
}

double QuantizerSpec::delay(double tau) const { return quantize(tau, delay_step); }
double QuantizerSpec::amplitude(double alpha) const { return quantize(alpha, amp_step); }
// Rounding just below 2 pi lands on 2 pi, which is the same lattice point as 0.
double QuantizerSpec::phase(double phi) const { return wrap_phase(quantize(wrap_phase(phi), phase_step)); }

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    const double px = pi * x;
    return std::sin(px) / px;
}

SincBank::SincBank(const SystemConfig &cfg, double resolution_s)
    : bandwidth_(cfg.bandwidth_b),
      resolution_(resolution_s > 0.0 ? resolution_s : cfg.sample_period() / (64.0 * cfg.n_st)),
      inv_resolution_(1.0 / resolution_),
      span_(2.0 * cfg.max_delay())
{
    half_ = static_cast<std::size_t>(std::ceil(span_ * inv_resolution_)) + 1;
    table_.resize(2 * half_ + 1);
    const double x_step = resolution_ * bandwidth_;
    for (std::size_t k = 0; k <= half_; ++k)
    {
        const double v = sinc(static_cast<double>(k) * x_step);
        table_[half_ + k] = v;
        table_[half_ - k] = v;
    }
}

double SincBank::operator()(double offset_s) const
{
    if (!(std::abs(offset_s) <= span_))
        throw DomainError("sinc bank: offset " + std::to_string(offset_s) + " s outside representable range");
    const double u = offset_s * inv_resolution_ + static_cast<double>(half_);
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-7)
        return table_[static_cast<std::size_t>(nearest)];
    const double lo = std::floor(u);
    const auto i = static_cast<std::size_t>(lo);
    const double frac = u - lo;
    return table_[i] + frac * (table_[i + 1] - table_[i]);
}

double SincBank::interpolation_bound() const
{
    const double h = resolution_ * bandwidth_;
    return h * h / 8.0 * (pi * pi / 3.0);
}

ComplexCir sample_cir(const MpcParamSet &theta, const SystemConfig &cfg)
{
    const std::size_t n = cfg.grid_length();
    ComplexCir cir;
    cir.t_index = theta.t_index;
    cir.samples.assign(n, cdouble{0.0, 0.0});
    for (const Mpc &p : theta.mpcs)
    {
        const cdouble c = std::polar(p.alpha, p.phi);
        for (std::size_t k = 0; k < n; ++k)
            cir.samples[k] += c * sinc((cfg.tap_delay(k + 1) - p.tau) * cfg.bandwidth_b);
    }
    return cir;
}

ProfiledCir profile(const ComplexCir &cir)
{
    ProfiledCir out;
    out.t_index = cir.t_index;
    out.samples.resize(cir.samples.size());
    std::transform(cir.samples.begin(), cir.samples.end(), out.samples.begin(),
                   [](const cdouble &z) { return std::abs(z); });
    return out;
}

void path_response(double tau_quantized, const SystemConfig &cfg, const SincBank &bank, std::size_t first_tap,
                   std::size_t n, std::vector<double> &out)
{
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = bank(cfg.tap_delay(first_tap + i) - tau_quantized);
}

ProfiledCir reconstruct(const MpcParamSet &theta_hat, const SystemConfig &cfg, const QuantizerSpec &q,
                        const SincBank &bank, std::size_t n_taps)
{
    if (n_taps == 0)
        n_taps = cfg.grid_length();
    if (n_taps > 2 * cfg.grid_length())
        throw DomainError("reconstruct: requested taps exceed the extended delay grid");

    std::vector<cdouble> acc(n_taps, cdouble{0.0, 0.0});
    std::vector<double> resp;
    for (const Mpc &p : theta_hat.mpcs)
    {
        const cdouble c = std::polar(q.amplitude(std::max(p.alpha, 0.0)), q.phase(p.phi));
        path_response(q.delay(p.tau), cfg, bank, 1, n_taps, resp);
        for (std::size_t k = 0; k < n_taps; ++k)
            acc[k] += c * resp[k];
    }

    ProfiledCir out;
    out.t_index = theta_hat.t_index;
    out.samples.resize(n_taps);
    for (std::size_t k = 0; k < n_taps; ++k)
        out.samples[k] = std::abs(acc[k]);
    return out;
}

double window_error(const ProfiledCir &a, const ProfiledCir &b, std::size_t w_start, std::size_t w_stop)
{
    if (w_start < 1 || w_start > w_stop || w_stop > a.size() || w_stop > b.size())
        throw DomainError("window_error: invalid window [" + std::to_string(w_start) + ", " +
                          std::to_string(w_stop) + "]");
    double acc = 0.0;
    for (std::size_t k = w_start - 1; k < w_stop; ++k)
    {
        const double d = a.samples[k] - b.samples[k];
        acc += d * d;
    }
    return acc;
}

double profiling_loss(const ProfiledCir &truth, const ProfiledCir &recon)
{
    if (truth.size() != recon.size())
        throw DomainError("profiling_loss: length mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
    {
        const double d = truth.samples[k] - recon.samples[k];
        num += d * d;
        den += truth.samples[k] * truth.samples[k];
    }
    if (!(den > 0.0))
        throw DomainError("profiling_loss: reference profile has zero energy");
    return num / den;
}

double loss_to_db(double loss)
{
    if (!(loss > 0.0))
        return loss_db_floor;
    return std::max(10.0 * std::log10(loss), loss_db_floor);
}

ProfiledCir denoise_threshold(const ProfiledCir &cir, double noise_floor_estimate)
{
    if (noise_floor_estimate < 0.0)
        throw DomainError("denoise_threshold: negative noise floor");
    ProfiledCir out = cir;
    const double thr = 3.0 * noise_floor_estimate;
    for (double &v : out.samples)
        if (v < thr)
            v = 0.0;
    return out;
}

double median_floor(const ProfiledCir &cir)
{
    if (cir.samples.empty())
        return 0.0;
    std::vector<double> tmp = cir.samples;
    auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
    std::nth_element(tmp.begin(), mid, tmp.end());
    return *mid;
}

void write_cir_csv(std::ostream &os, const ProfiledCir &cir, const SystemConfig &cfg)
{
    os << "tap_index,delay_s,magnitude\n";
    os.precision(17);
    for (std::size_t k = 0; k < cir.size(); ++k)
        os << (k + 1) << ',' << cfg.tap_delay(k + 1) << ',' << cir.samples[k] << '\n';
}

} // namespace mpcprof
