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
#include "mpcprof/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mpcprof
{

inline constexpr int dataset_format_version = 1;

nlohmann::json to_json(const SystemConfig &cfg);
// Missing keys keep their defaults. Throws ConfigError on wrong types.
SystemConfig system_config_from_json(const nlohmann::json &j);

nlohmann::json to_json(const DatasetSpec &spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json &j);

nlohmann::json to_json(const MpcParamSet &theta);
MpcParamSet param_set_from_json(const nlohmann::json &j);

/// Record file layout, one record per channel, all fields little-endian
/// IEEE 754 binary64:
///
///     L, tau_1, alpha_1, phi_1, ..., tau_L, alpha_L, phi_L,
///     re(c_1), im(c_1), ..., re(c_W), im(c_W)
///
/// c_k is complex CIR tap k of the observation window (W taps).
void write_records(std::ostream &os, const std::vector<DatasetEntry> &entries, std::size_t n_taps);
std::vector<DatasetEntry> read_records(std::istream &is, std::size_t n_taps);

struct Dataset
{
    SystemConfig cfg;
    DatasetSpec spec;
    std::vector<DatasetEntry> entries;
};

// Writes <dir>/<stem>.json (metadata) and <dir>/<stem>.bin (records).
// Refuses to overwrite existing files unless force is set.
void write_dataset(const std::filesystem::path &dir, const std::string &stem, const Dataset &ds, bool force);

// Reads from the metadata file written by write_dataset.
Dataset read_dataset(const std::filesystem::path &metadata_file);

} // namespace mpcprof
