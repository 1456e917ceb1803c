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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mpcprof
{

/// Named float32 tensor, row-major.
struct Tensor
{
    std::vector<std::size_t> shape;
    std::vector<float> values;

    std::size_t count() const;
};

enum class LayerKind
{
    conv1d,    // kernel (k, in, out), bias (out); stride 1, same padding
    maxpool1d, // pool == stride, floor truncation
    flatten,   // row-major over (position, channel)
    dense,     // kernel (in, out), bias (out)
};

enum class Activation
{
    linear,
    relu,
};

struct LayerSpec
{
    std::string name;
    LayerKind kind = LayerKind::dense;
    Activation activation = Activation::linear;
    std::size_t pool = 0;   // maxpool1d only
    std::string kernel;     // tensor names, conv1d and dense only
    std::string bias;
};

/// Weight bundle shared with the external trainer.
///
/// File layout (all integers little-endian):
///
///     bytes 0..7    magic "MPCWBNDL"
///     bytes 8..11   uint32 header length H
///     bytes 12..    H bytes of UTF-8 JSON header
///     then          tensor blob, float32 little-endian, row-major
///
/// Header keys: format_version, architecture_id, model_order (L, zero for
/// classifiers), n_classes, input_window (W), input_channels,
/// flatten_length, layers [{name, type, activation, pool, kernel, bias}],
/// tensors [{name, shape, offset}] with byte offsets relative to the blob.
struct WeightBundle
{
    int format_version = 1;
    std::string architecture_id;
    std::size_t model_order = 0;
    std::size_t n_classes = 0;
    std::size_t input_window = 0;
    std::size_t input_channels = 0;
    std::size_t flatten_length = 0; // positions left after the conv/pool stack
    std::vector<LayerSpec> layers;
    std::map<std::string, Tensor> tensors;

    const Tensor &tensor(const std::string &name) const;

    // Output width of the layer stack; throws FormatError when shapes do not chain.
    std::size_t check_chain() const;
};

inline constexpr int weight_bundle_format_version = 1;

// Start-parameter network: conv(12,3) relu, pool 2, conv(12,3) relu, pool 4,
// flatten, dense 50 relu, dense 50 relu, dense 3L linear.
inline constexpr const char *mpc_net_architecture = "mpc-start-v1:conv-same-stride1:pool-size-eq-stride";
// Model-order classifier: dense stack on normalized mode singular values.
inline constexpr const char *model_order_architecture = "model-order-dense-v1:top8-per-mode-normalized";

void write_weight_bundle(std::ostream &os, const WeightBundle &bundle);
WeightBundle read_weight_bundle(std::istream &is);
void save_weight_bundle(const std::filesystem::path &file, const WeightBundle &bundle);
WeightBundle load_weight_bundle(const std::filesystem::path &file);

// Table I layer list for input window W and model order L, zero weights.
WeightBundle make_mpc_net(std::size_t input_window, std::size_t model_order);

// Dense classifier with the given hidden widths, zero weights.
WeightBundle make_dense_classifier(std::size_t input_size, const std::vector<std::size_t> &hidden,
                                   std::size_t n_classes);

// Forward pass. Input is (positions x channels) row-major for conv stacks or
// a flat vector for dense-only stacks. Throws FormatError on shape mismatch
// and NumericError on non-finite activations.
std::vector<double> forward(const WeightBundle &bundle, const std::vector<double> &input, std::size_t positions,
                            std::size_t channels);

} // namespace mpcprof
