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

#include "mpcprof/dataset_io.hpp"

#include "mpcprof/errors.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

namespace mpcprof
{

using nlohmann::json;

namespace
{

template <class T>
void read_opt(const json &j, const char *key, T &dst)
{
    if (!j.contains(key))
        return;
    try
    {
        dst = j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void put_f64(std::ostream &os, double v)
{
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int b = 0; b < 8; ++b)
        buf[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    os.write(buf, 8);
}

bool get_f64(std::istream &is, double &v)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8))
        return false;
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
    return true;
}

} // namespace

json to_json(const SystemConfig &cfg)
{
    return json{{"n_sc", cfg.n_sc},
                {"m_prb", cfg.m_prb},
                {"csi_rs_spacing", cfg.csi_rs_spacing},
                {"n1", cfg.n1},
                {"n2", cfg.n2},
                {"d_v", cfg.d_v},
                {"d_h", cfg.d_h},
                {"carrier_wavelength", cfg.carrier_wavelength},
                {"bandwidth_b", cfg.bandwidth_b},
                {"n_st", cfg.n_st},
                {"tilt_angles", cfg.tilt_angles},
                {"azimuth_angles", cfg.azimuth_angles},
                {"obs_window_w", cfg.obs_window_w}};
}

SystemConfig system_config_from_json(const json &j)
{
    SystemConfig cfg;
    if (!j.is_object())
        throw ConfigError("system config must be a JSON object");
    read_opt(j, "n_sc", cfg.n_sc);
    read_opt(j, "m_prb", cfg.m_prb);
    read_opt(j, "csi_rs_spacing", cfg.csi_rs_spacing);
    read_opt(j, "n1", cfg.n1);
    read_opt(j, "n2", cfg.n2);
    read_opt(j, "d_v", cfg.d_v);
    read_opt(j, "d_h", cfg.d_h);
    read_opt(j, "carrier_wavelength", cfg.carrier_wavelength);
    read_opt(j, "bandwidth_b", cfg.bandwidth_b);
    read_opt(j, "n_st", cfg.n_st);
    read_opt(j, "tilt_angles", cfg.tilt_angles);
    read_opt(j, "azimuth_angles", cfg.azimuth_angles);
    read_opt(j, "obs_window_w", cfg.obs_window_w);
    cfg.validate();
    return cfg;
}

json to_json(const DatasetSpec &spec)
{
    json j{{"n_channels", spec.n_channels},
           {"delay_range", {spec.delay_min, spec.delay_max}},
           {"phase_range", {spec.phase_min, spec.phase_max}},
           {"amplitude_distribution", "exponential(mean=1), strongest path normalized to 1"},
           {"model_order_range", {spec.model_order_min, spec.model_order_max}},
           {"min_separation", spec.min_separation},
           {"on_lattice", spec.on_lattice},
           {"rng_seed", spec.rng_seed}};
    j["snr_db"] = spec.snr_db ? json(*spec.snr_db) : json(nullptr);
    j["amplitude_spread_db"] = spec.amplitude_spread_db ? json(*spec.amplitude_spread_db) : json(nullptr);
    return j;
}

DatasetSpec dataset_spec_from_json(const json &j)
{
    DatasetSpec spec;
    if (!j.is_object())
        throw ConfigError("dataset spec must be a JSON object");
    read_opt(j, "n_channels", spec.n_channels);
    if (j.contains("delay_range"))
    {
        std::vector<double> r;
        read_opt(j, "delay_range", r);
        if (r.size() != 2)
            throw ConfigError("delay_range needs two values");
        spec.delay_min = r[0];
        spec.delay_max = r[1];
    }
    if (j.contains("phase_range"))
    {
        std::vector<double> r;
        read_opt(j, "phase_range", r);
        if (r.size() != 2)
            throw ConfigError("phase_range needs two values");
        spec.phase_min = r[0];
        spec.phase_max = r[1];
    }
    if (j.contains("model_order_range"))
    {
        std::vector<int> r;
        read_opt(j, "model_order_range", r);
        if (r.size() != 2)
            throw ConfigError("model_order_range needs two values");
        spec.model_order_min = r[0];
        spec.model_order_max = r[1];
    }
    read_opt(j, "min_separation", spec.min_separation);
    read_opt(j, "on_lattice", spec.on_lattice);
    read_opt(j, "rng_seed", spec.rng_seed);
    if (j.contains("snr_db") && !j["snr_db"].is_null())
    {
        double v = 0.0;
        read_opt(j, "snr_db", v);
        spec.snr_db = v;
    }
    if (j.contains("amplitude_spread_db") && !j["amplitude_spread_db"].is_null())
    {
        double v = 0.0;
        read_opt(j, "amplitude_spread_db", v);
        spec.amplitude_spread_db = v;
    }
    return spec;
}

json to_json(const MpcParamSet &theta)
{
    json paths = json::array();
    for (const Mpc &p : theta.mpcs)
        paths.push_back({{"tau_s", p.tau}, {"alpha", p.alpha}, {"phi_rad", p.phi}});
    return json{{"t_index", theta.t_index}, {"mpcs", paths}};
}

MpcParamSet param_set_from_json(const json &j)
{
    MpcParamSet theta;
    try
    {
        theta.t_index = j.value("t_index", 0);
        for (const auto &p : j.at("mpcs"))
            theta.mpcs.push_back({p.at("tau_s").get<double>(), p.at("alpha").get<double>(), p.at("phi_rad").get<double>()});
    }
    catch (const json::exception &e)
    {
        throw FormatError(std::string("parameter set: ") + e.what());
    }
    return theta;
}

void write_records(std::ostream &os, const std::vector<DatasetEntry> &entries, std::size_t n_taps)
{
    for (const DatasetEntry &e : entries)
    {
        if (e.cir.samples.size() != n_taps)
            throw FormatError("write_records: CIR length " + std::to_string(e.cir.samples.size()) +
                              " does not match window " + std::to_string(n_taps));
        put_f64(os, static_cast<double>(e.theta.size()));
        for (const Mpc &p : e.theta.mpcs)
        {
            put_f64(os, p.tau);
            put_f64(os, p.alpha);
            put_f64(os, p.phi);
        }
        for (const cdouble &z : e.cir.samples)
        {
            put_f64(os, z.real());
            put_f64(os, z.imag());
        }
    }
}

std::vector<DatasetEntry> read_records(std::istream &is, std::size_t n_taps)
{
    std::vector<DatasetEntry> out;
    double l_field = 0.0;
    while (get_f64(is, l_field))
    {
        if (!(l_field >= 1.0) || l_field != std::floor(l_field) || l_field > 1e6)
            throw FormatError("record " + std::to_string(out.size()) + ": invalid model order field");
        DatasetEntry e;
        e.theta.mpcs.resize(static_cast<std::size_t>(l_field));
        for (Mpc &p : e.theta.mpcs)
            if (!get_f64(is, p.tau) || !get_f64(is, p.alpha) || !get_f64(is, p.phi))
                throw FormatError("record " + std::to_string(out.size()) + ": truncated parameters");
        e.cir.samples.resize(n_taps);
        for (cdouble &z : e.cir.samples)
        {
            double re = 0.0;
            double im = 0.0;
            if (!get_f64(is, re) || !get_f64(is, im))
                throw FormatError("record " + std::to_string(out.size()) + ": truncated CIR");
            z = {re, im};
        }
        e.profile = profile(e.cir);
        out.push_back(std::move(e));
    }
    return out;
}

void write_dataset(const std::filesystem::path &dir, const std::string &stem, const Dataset &ds, bool force)
{
    namespace fs = std::filesystem;
    const fs::path meta = dir / (stem + ".json");
    const fs::path bin = dir / (stem + ".bin");
    if (!force && (fs::exists(meta) || fs::exists(bin)))
        throw UsageError("refusing to overwrite " + meta.string() + " (use --force)");
    fs::create_directories(dir);

    json j{{"format_version", dataset_format_version},
           {"record_file", bin.filename().string()},
           {"record_layout", "little-endian binary64: L, L x (tau_s, alpha, phi_rad), W x (re, im)"},
           {"n_channels", ds.entries.size()},
           {"cir_taps", ds.cfg.obs_window_w},
           {"seed", ds.spec.rng_seed},
           {"system_config", to_json(ds.cfg)},
           {"dataset_spec", to_json(ds.spec)}};

    std::ofstream bf(bin, std::ios::binary | std::ios::trunc);
    if (!bf)
        throw FormatError("cannot open " + bin.string());
    write_records(bf, ds.entries, static_cast<std::size_t>(ds.cfg.obs_window_w));
    std::ofstream mf(meta, std::ios::trunc);
    if (!mf)
        throw FormatError("cannot open " + meta.string());
    mf << j.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path &metadata_file)
{
    std::ifstream mf(metadata_file);
    if (!mf)
        throw FormatError("cannot open " + metadata_file.string());
    json j;
    try
    {
        mf >> j;
    }
    catch (const json::exception &e)
    {
        throw FormatError("dataset metadata: " + std::string(e.what()));
    }
    if (j.value("format_version", 0) != dataset_format_version)
        throw FormatError("dataset metadata: unsupported format_version");

    Dataset ds;
    ds.cfg = system_config_from_json(j.value("system_config", json::object()));
    ds.spec = dataset_spec_from_json(j.value("dataset_spec", json::object()));
    const auto taps = j.value("cir_taps", ds.cfg.obs_window_w);
    if (taps != ds.cfg.obs_window_w)
        throw FormatError("dataset metadata: cir_taps disagrees with obs_window_w");

    const auto bin = metadata_file.parent_path() / j.value("record_file", std::string{});
    std::ifstream bf(bin, std::ios::binary);
    if (!bf)
        throw FormatError("cannot open " + bin.string());
    ds.entries = read_records(bf, static_cast<std::size_t>(taps));
    if (j.contains("n_channels") && j["n_channels"].get<std::size_t>() != ds.entries.size())
        throw FormatError("dataset: record count disagrees with metadata");
    return ds;
}

} // namespace mpcprof
