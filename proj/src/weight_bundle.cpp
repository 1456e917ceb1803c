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

#include "mpcprof/weight_bundle.hpp"

#include "mpcprof/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace mpcprof
{

using nlohmann::json;

namespace
{

constexpr char magic[8] = {'M', 'P', 'C', 'W', 'B', 'N', 'D', 'L'};

const char *kind_name(LayerKind k)
{
    switch (k)
    {
    case LayerKind::conv1d:
        return "conv1d";
    case LayerKind::maxpool1d:
        return "maxpool1d";
    case LayerKind::flatten:
        return "flatten";
    case LayerKind::dense:
        return "dense";
    }
    return "?";
}

LayerKind kind_from(const std::string &s)
{
    if (s == "conv1d")
        return LayerKind::conv1d;
    if (s == "maxpool1d")
        return LayerKind::maxpool1d;
    if (s == "flatten")
        return LayerKind::flatten;
    if (s == "dense")
        return LayerKind::dense;
    throw FormatError("weight bundle: unknown layer type '" + s + "'");
}

Activation activation_from(const std::string &s)
{
    if (s == "relu")
        return Activation::relu;
    if (s == "linear")
        return Activation::linear;
    throw FormatError("weight bundle: unknown activation '" + s + "'");
}

void put_u32(std::ostream &os, std::uint32_t v)
{
    char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream &is)
{
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char *>(b), 4))
        throw FormatError("weight bundle: truncated header length");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void expect_shape(const WeightBundle &b, const std::string &name, const std::vector<std::size_t> &shape)
{
    const Tensor &t = b.tensor(name);
    if (t.shape != shape)
        throw FormatError("weight bundle: tensor '" + name + "' has an unexpected shape");
}

Tensor zeros(std::vector<std::size_t> shape)
{
    Tensor t;
    t.shape = std::move(shape);
    t.values.assign(t.count(), 0.0f);
    return t;
}

void add_trainable(WeightBundle &b, const std::string &name, LayerKind kind, Activation act,
                   std::vector<std::size_t> kernel_shape)
{
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.activation = act;
    l.kernel = name + "/kernel";
    l.bias = name + "/bias";
    b.tensors[l.bias] = zeros({kernel_shape.back()});
    b.tensors[l.kernel] = zeros(std::move(kernel_shape));
    b.layers.push_back(std::move(l));
}

} // namespace

std::size_t Tensor::count() const
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

const Tensor &WeightBundle::tensor(const std::string &name) const
{
    const auto it = tensors.find(name);
    if (it == tensors.end())
        throw FormatError("weight bundle: missing tensor '" + name + "'");
    return it->second;
}

std::size_t WeightBundle::check_chain() const
{
    std::size_t positions = input_window;
    std::size_t channels = input_channels;
    bool flat = false;
    bool saw_flatten = false;
    if (positions == 0 || channels == 0)
        throw FormatError("weight bundle: input shape must be non-empty");
    for (const LayerSpec &l : layers)
    {
        switch (l.kind)
        {
        case LayerKind::conv1d: {
            if (flat)
                throw FormatError("weight bundle: conv1d after flatten in '" + l.name + "'");
            const Tensor &k = tensor(l.kernel);
            if (k.shape.size() != 3 || k.shape[1] != channels)
                throw FormatError("weight bundle: conv1d '" + l.name + "' kernel does not chain");
            expect_shape(*this, l.bias, {k.shape[2]});
            channels = k.shape[2];
            break;
        }
        case LayerKind::maxpool1d:
            if (flat || l.pool == 0)
                throw FormatError("weight bundle: invalid maxpool1d '" + l.name + "'");
            positions /= l.pool;
            break;
        case LayerKind::flatten:
            if (positions != flatten_length)
                throw FormatError("weight bundle: flatten_length " + std::to_string(flatten_length) +
                                  " disagrees with the layer stack (" + std::to_string(positions) + ")");
            channels *= positions;
            positions = 1;
            flat = true;
            saw_flatten = true;
            break;
        case LayerKind::dense: {
            if (!flat && positions != 1)
                throw FormatError("weight bundle: dense '" + l.name + "' before flatten");
            const Tensor &k = tensor(l.kernel);
            if (k.shape.size() != 2 || k.shape[0] != channels)
                throw FormatError("weight bundle: dense '" + l.name + "' kernel does not chain");
            expect_shape(*this, l.bias, {k.shape[1]});
            channels = k.shape[1];
            flat = true;
            break;
        }
        }
        if (positions == 0 || channels == 0)
            throw FormatError("weight bundle: layer '" + l.name + "' produces an empty output");
    }
    if (!saw_flatten && flatten_length != 0 && flatten_length != positions)
        throw FormatError("weight bundle: flatten_length set without a flatten layer");
    return positions * channels;
}

void write_weight_bundle(std::ostream &os, const WeightBundle &bundle)
{
    bundle.check_chain();
    json layers = json::array();
    for (const LayerSpec &l : bundle.layers)
    {
        json jl{{"name", l.name}, {"type", kind_name(l.kind)},
                {"activation", l.activation == Activation::relu ? "relu" : "linear"}};
        if (l.kind == LayerKind::maxpool1d)
            jl["pool"] = l.pool;
        if (!l.kernel.empty())
        {
            jl["kernel"] = l.kernel;
            jl["bias"] = l.bias;
        }
        layers.push_back(jl);
    }
    json tensors = json::array();
    std::size_t offset = 0;
    for (const auto &[name, t] : bundle.tensors)
    {
        if (t.values.size() != t.count())
            throw FormatError("weight bundle: tensor '" + name + "' value count mismatch");
        tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
        offset += 4 * t.count();
    }
    const json header{{"format_version", bundle.format_version},
                      {"architecture_id", bundle.architecture_id},
                      {"model_order", bundle.model_order},
                      {"n_classes", bundle.n_classes},
                      {"input_window", bundle.input_window},
                      {"input_channels", bundle.input_channels},
                      {"flatten_length", bundle.flatten_length},
                      {"layers", layers},
                      {"tensors", tensors}};
    const std::string text = header.dump();
    os.write(magic, sizeof magic);
    put_u32(os, static_cast<std::uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto &[name, t] : bundle.tensors)
        for (const float v : t.values)
        {
            const auto bits = std::bit_cast<std::uint32_t>(v);
            put_u32(os, bits);
        }
}

WeightBundle read_weight_bundle(std::istream &is)
{
    char m[8];
    if (!is.read(m, 8) || std::memcmp(m, magic, 8) != 0)
        throw FormatError("weight bundle: bad magic");
    const std::uint32_t len = get_u32(is);
    std::string text(len, '\0');
    if (!is.read(text.data(), len))
        throw FormatError("weight bundle: truncated header");
    std::vector<char> blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    WeightBundle b;
    try
    {
        const json h = json::parse(text);
        b.format_version = h.at("format_version").get<int>();
        if (b.format_version != weight_bundle_format_version)
            throw FormatError("weight bundle: unsupported format_version " + std::to_string(b.format_version));
        b.architecture_id = h.at("architecture_id").get<std::string>();
        b.model_order = h.at("model_order").get<std::size_t>();
        b.n_classes = h.value("n_classes", std::size_t{0});
        b.input_window = h.at("input_window").get<std::size_t>();
        b.input_channels = h.at("input_channels").get<std::size_t>();
        b.flatten_length = h.at("flatten_length").get<std::size_t>();
        for (const json &jl : h.at("layers"))
        {
            LayerSpec l;
            l.name = jl.at("name").get<std::string>();
            l.kind = kind_from(jl.at("type").get<std::string>());
            l.activation = activation_from(jl.value("activation", std::string("linear")));
            l.pool = jl.value("pool", std::size_t{0});
            l.kernel = jl.value("kernel", std::string{});
            l.bias = jl.value("bias", std::string{});
            b.layers.push_back(std::move(l));
        }
        for (const json &jt : h.at("tensors"))
        {
            Tensor t;
            t.shape = jt.at("shape").get<std::vector<std::size_t>>();
            const auto offset = jt.at("offset").get<std::size_t>();
            const std::size_t n = t.count();
            if (offset % 4 != 0 || offset + 4 * n > blob.size())
                throw FormatError("weight bundle: tensor '" + jt.at("name").get<std::string>() + "' outside the blob");
            t.values.resize(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                std::uint32_t bits = 0;
                for (int k = 0; k < 4; ++k)
                    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[offset + 4 * i + k])) << (8 * k);
                t.values[i] = std::bit_cast<float>(bits);
            }
            b.tensors[jt.at("name").get<std::string>()] = std::move(t);
        }
    }
    catch (const json::exception &e)
    {
        throw FormatError(std::string("weight bundle header: ") + e.what());
    }
    b.check_chain();
    return b;
}

void save_weight_bundle(const std::filesystem::path &file, const WeightBundle &bundle)
{
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os)
        throw FormatError("cannot open " + file.string());
    write_weight_bundle(os, bundle);
}

WeightBundle load_weight_bundle(const std::filesystem::path &file)
{
    std::ifstream is(file, std::ios::binary);
    if (!is)
        throw FormatError("cannot open weight bundle " + file.string());
    return read_weight_bundle(is);
}

WeightBundle make_mpc_net(std::size_t input_window, std::size_t model_order)
{
    WeightBundle b;
    b.architecture_id = mpc_net_architecture;
    b.model_order = model_order;
    b.input_window = input_window;
    b.input_channels = 2;
    b.flatten_length = input_window / 2 / 4;
    add_trainable(b, "conv1", LayerKind::conv1d, Activation::relu, {3, 2, 12});
    b.layers.push_back({"pool1", LayerKind::maxpool1d, Activation::linear, 2, {}, {}});
    add_trainable(b, "conv2", LayerKind::conv1d, Activation::relu, {3, 12, 12});
    b.layers.push_back({"pool2", LayerKind::maxpool1d, Activation::linear, 4, {}, {}});
    b.layers.push_back({"flatten", LayerKind::flatten, Activation::linear, 0, {}, {}});
    add_trainable(b, "dense1", LayerKind::dense, Activation::relu, {12 * b.flatten_length, 50});
    add_trainable(b, "dense2", LayerKind::dense, Activation::relu, {50, 50});
    add_trainable(b, "out", LayerKind::dense, Activation::linear, {50, 3 * model_order});
    return b;
}

WeightBundle make_dense_classifier(std::size_t input_size, const std::vector<std::size_t> &hidden,
                                   std::size_t n_classes)
{
    WeightBundle b;
    b.architecture_id = model_order_architecture;
    b.n_classes = n_classes;
    b.input_window = 1;
    b.input_channels = input_size;
    std::size_t width = input_size;
    for (std::size_t k = 0; k < hidden.size(); ++k)
    {
        add_trainable(b, "hidden" + std::to_string(k + 1), LayerKind::dense, Activation::relu, {width, hidden[k]});
        width = hidden[k];
    }
    add_trainable(b, "out", LayerKind::dense, Activation::linear, {width, n_classes});
    return b;
}

std::vector<double> forward(const WeightBundle &bundle, const std::vector<double> &input, std::size_t positions,
                            std::size_t channels)
{
    if (positions != bundle.input_window || channels != bundle.input_channels || input.size() != positions * channels)
        throw FormatError("forward: input shape does not match the bundle (" + std::to_string(positions) + "x" +
                          std::to_string(channels) + " vs " + std::to_string(bundle.input_window) + "x" +
                          std::to_string(bundle.input_channels) + ")");
    bundle.check_chain();

    std::vector<double> x = input;
    std::vector<double> y;
    std::size_t p_cur = positions;
    std::size_t c_cur = channels;
    for (const LayerSpec &l : bundle.layers)
    {
        switch (l.kind)
        {
        case LayerKind::conv1d: {
            const Tensor &k = bundle.tensor(l.kernel);
            const Tensor &b = bundle.tensor(l.bias);
            const std::size_t width = k.shape[0];
            const std::size_t c_out = k.shape[2];
            const auto pad = static_cast<std::ptrdiff_t>((width - 1) / 2);
            y.assign(p_cur * c_out, 0.0);
            for (std::size_t p = 0; p < p_cur; ++p)
                for (std::size_t o = 0; o < c_out; ++o)
                {
                    double acc = b.values[o];
                    for (std::size_t t = 0; t < width; ++t)
                    {
                        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(p + t) - pad;
                        if (src < 0 || src >= static_cast<std::ptrdiff_t>(p_cur))
                            continue;
                        for (std::size_t c = 0; c < c_cur; ++c)
                            acc += x[static_cast<std::size_t>(src) * c_cur + c] *
                                   static_cast<double>(k.values[(t * c_cur + c) * c_out + o]);
                    }
                    y[p * c_out + o] = acc;
                }
            c_cur = c_out;
            break;
        }
        case LayerKind::maxpool1d: {
            const std::size_t p_out = p_cur / l.pool;
            y.assign(p_out * c_cur, 0.0);
            for (std::size_t p = 0; p < p_out; ++p)
                for (std::size_t c = 0; c < c_cur; ++c)
                {
                    double m = x[(p * l.pool) * c_cur + c];
                    for (std::size_t s = 1; s < l.pool; ++s)
                        m = std::max(m, x[(p * l.pool + s) * c_cur + c]);
                    y[p * c_cur + c] = m;
                }
            p_cur = p_out;
            break;
        }
        case LayerKind::flatten:
            y = x;
            c_cur *= p_cur;
            p_cur = 1;
            break;
        case LayerKind::dense: {
            const Tensor &k = bundle.tensor(l.kernel);
            const Tensor &b = bundle.tensor(l.bias);
            const std::size_t n_in = k.shape[0];
            const std::size_t n_out = k.shape[1];
            y.assign(n_out, 0.0);
            for (std::size_t o = 0; o < n_out; ++o)
            {
                double acc = b.values[o];
                for (std::size_t i = 0; i < n_in; ++i)
                    acc += x[i] * static_cast<double>(k.values[i * n_out + o]);
                y[o] = acc;
            }
            c_cur = n_out;
            p_cur = 1;
            break;
        }
        }
        if (l.activation == Activation::relu)
            for (double &v : y)
                v = std::max(v, 0.0);
        for (const double v : y)
            if (!std::isfinite(v))
                throw NumericError("forward: non-finite activation in layer '" + l.name + "'");
        x.swap(y);
    }
    return x;
}

} // namespace mpcprof
