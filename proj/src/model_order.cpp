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

#include "mpcprof/model_order.hpp"

#include "mpcprof/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace mpcprof
{

namespace
{

std::vector<std::size_t> resolve_modes(const ModeSingularValues &sv, const std::vector<std::size_t> &modes)
{
    if (modes.empty())
    {
        std::vector<std::size_t> all(sv.sigma.size());
        for (std::size_t d = 0; d < all.size(); ++d)
            all[d] = d;
        return all;
    }
    for (std::size_t d : modes)
        if (d >= sv.sigma.size())
            throw ConfigError("model order: mode " + std::to_string(d) + " does not exist");
    return modes;
}

} // namespace

Eigen::MatrixXcd unfold(const ChannelTensor &h, std::size_t mode)
{
    const std::size_t dims[3] = {h.n_t(), h.m(), h.i()};
    if (mode > 2)
        throw DomainError("unfold: mode must be 0, 1 or 2");
    const std::size_t d1 = (mode + 1) % 3;
    const std::size_t d2 = (mode + 2) % 3;
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(dims[mode]), static_cast<Eigen::Index>(dims[d1] * dims[d2]));
    std::size_t idx[3];
    for (std::size_t r = 0; r < dims[mode]; ++r)
        for (std::size_t c2 = 0; c2 < dims[d2]; ++c2)
            for (std::size_t c1 = 0; c1 < dims[d1]; ++c1)
            {
                idx[mode] = r;
                idx[d1] = c1;
                idx[d2] = c2;
                out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c1 + dims[d1] * c2)) =
                    h(idx[0], idx[1], idx[2]);
            }
    return out;
}

ModeSingularValues hosvd_singular_values(const ChannelTensor &h)
{
    if (h.empty())
        throw DomainError("hosvd: empty tensor");
    ModeSingularValues sv;
    sv.tensor_shape = {h.n_t(), h.m(), h.i()};
    double energy = 0.0;
    for (const cdouble &z : h.data())
        energy += std::norm(z);
    sv.sigma.resize(3);
    if (!(energy > 0.0))
    {
        sv.degenerate = true;
        for (std::size_t d = 0; d < 3; ++d)
            sv.sigma[d].assign(std::min(sv.tensor_shape[d], h.data().size() / sv.tensor_shape[d]), 0.0);
        return sv;
    }
    for (std::size_t d = 0; d < 3; ++d)
    {
        const Eigen::MatrixXcd a = unfold(h, d);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
        const Eigen::VectorXd s = svd.singularValues();
        sv.sigma[d].assign(s.data(), s.data() + s.size());
    }
    return sv;
}

std::size_t select_model_order(const ModeSingularValues &sv, double noise_floor_db, const std::vector<std::size_t> &modes)
{
    const auto used = resolve_modes(sv, modes);
    if (sv.degenerate || used.empty())
        return 1;
    std::vector<std::size_t> counts;
    counts.reserve(used.size());
    for (std::size_t d : used)
    {
        const auto &s = sv.sigma[d];
        std::size_t count = 0;
        if (!s.empty() && s.front() > 0.0)
        {
            const double threshold = s.front() * std::pow(10.0, noise_floor_db / 20.0);
            for (double v : s)
                if (v > threshold || v == s.front())
                    ++count;
        }
        counts.push_back(count);
    }
    std::sort(counts.begin(), counts.end());
    const std::size_t median = counts[(counts.size() - 1) / 2];
    return std::max<std::size_t>(median, 1);
}

std::vector<double> model_order_features(const ModeSingularValues &sv, const std::vector<std::size_t> &modes)
{
    const auto used = resolve_modes(sv, modes);
    std::vector<double> out;
    out.reserve(used.size() * model_order_features_per_mode);
    for (std::size_t d : used)
    {
        const auto &s = sv.sigma[d];
        const double top = s.empty() ? 0.0 : s.front();
        for (std::size_t k = 0; k < model_order_features_per_mode; ++k)
            out.push_back(k < s.size() && top > 0.0 ? s[k] / top : 0.0);
    }
    return out;
}

void write_features_csv_header(std::ostream &os, std::size_t n_modes)
{
    for (std::size_t d = 0; d < n_modes; ++d)
        for (std::size_t k = 0; k < model_order_features_per_mode; ++k)
            os << "mode" << d << "_s" << k << ',';
    os << "model_order\n";
}

void write_features_csv_row(std::ostream &os, const std::vector<double> &features, std::size_t label)
{
    const auto old = os.precision(17);
    for (double f : features)
        os << f << ',';
    os << label << '\n';
    os.precision(old);
}

std::size_t nn_model_order(const ModeSingularValues &sv, const WeightBundle &weights, const std::vector<std::size_t> &modes)
{
    if (weights.architecture_id != model_order_architecture)
        throw FormatError("model order: bundle architecture '" + weights.architecture_id + "' is not '" +
                          model_order_architecture + "'");
    const auto features = model_order_features(sv, modes);
    if (weights.input_window != 1 || weights.input_channels != features.size())
        throw FormatError("model order: bundle expects " + std::to_string(weights.input_channels) +
                          " features, got " + std::to_string(features.size()));
    const auto scores = forward(weights, features, 1, features.size());
    if (scores.empty())
        throw FormatError("model order: classifier has no outputs");
    const auto best = std::max_element(scores.begin(), scores.end());
    return 1 + static_cast<std::size_t>(best - scores.begin());
}

ModelOrderCase synth_model_order_case(const ModelOrderCaseSpec &spec, const SystemConfig &cfg, std::size_t index)
{
    DatasetEntry entry = generate_channel(spec.paths, cfg, index);
    // Geometry comes from a stream disjoint from the path draw.
    auto rng = channel_rng(spec.paths.rng_seed ^ 0x9e3779b97f4a7c15ull, index);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::vector<PathGeometry> geometry(entry.theta.size());
    for (PathGeometry &g : geometry)
    {
        g.elevation = spec.elevation_max * ud(rng);
        g.azimuth = spec.azimuth_max * ud(rng);
        g.doppler_hz = spec.doppler_max_hz * ud(rng);
    }
    ModelOrderCase out;
    out.true_order = entry.theta.size();
    out.tensor = synth_channel_tensor(entry.theta, geometry, cfg, spec.n_instants, spec.cadence_s);
    if (spec.paths.snr_db)
    {
        double power = 0.0;
        for (const cdouble &z : out.tensor.data())
            power += std::norm(z);
        power /= static_cast<double>(out.tensor.data().size());
        std::normal_distribution<double> nd(0.0, std::sqrt(power * std::pow(10.0, -*spec.paths.snr_db / 10.0) / 2.0));
        for (cdouble &z : out.tensor.data())
            z += cdouble{nd(rng), nd(rng)};
    }
    return out;
}

} // namespace mpcprof
