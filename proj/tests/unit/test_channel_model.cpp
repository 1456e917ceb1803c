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

#include "test_support.hpp"

#include "mpcprof/channel_model.hpp"
#include "mpcprof/dataset_io.hpp"
#include "mpcprof/errors.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace mpcprof;
using namespace mpcprof::testing;
using Catch::Approx;

namespace
{

ChannelTensor random_tensor(std::mt19937_64 &rng, std::size_t n_t, std::size_t m, std::size_t i)
{
    std::normal_distribution<double> nd;
    ChannelTensor h(n_t, m, i);
    for (auto &z : h.data())
        z = {nd(rng), nd(rng)};
    return h;
}

// Brute-force beamformer: double loop over vertical and horizontal elements.
cdouble naive_beam(const ChannelTensor &h, std::size_t f, std::size_t t, double tilt, double az, const SystemConfig &cfg)
{
    cdouble acc{0.0, 0.0};
    for (int n2 = 0; n2 < cfg.n2; ++n2)
        for (int n1 = 0; n1 < cfg.n1; ++n1)
        {
            const cdouble wv = std::exp(cdouble{0.0, two_pi * n1 * cfg.d_v * std::sin(tilt)});
            const cdouble wh = std::exp(cdouble{0.0, two_pi * n2 * cfg.d_h * std::sin(az)});
            acc += h(static_cast<std::size_t>(n2 * cfg.n1 + n1), f, t) * wh * wv;
        }
    return acc;
}

std::filesystem::path scratch_dir(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("mpcprof_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("steering_vector: examples and unit modulus")
{
    const Eigen::VectorXcd a = steering_vector(0.0, 4, 0.7);
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(a(k) - cdouble{1.0, 0.0}) < 1e-15);
    const Eigen::VectorXcd b = steering_vector(pi / 2.0, 2, 0.5);
    CHECK(std::abs(b(0) - cdouble{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(b(1) - cdouble{-1.0, 0.0}) < 1e-15);
    const Eigen::VectorXcd c = steering_vector(deg2rad(15.0), 16, 0.5);
    CHECK(std::arg(c(1)) == Approx(0.8131).margin(5e-5));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ud(-pi, pi);
    for (int i = 0; i < 100; ++i)
    {
        const Eigen::VectorXcd v = steering_vector(ud(rng), 16, 0.5 + 0.01 * i);
        for (int k = 0; k < 16; ++k)
            CHECK(std::abs(std::abs(v(k)) - 1.0) < 1e-12);
    }
}

TEST_CASE("beamform: constant channel at boresight sums all antennas")
{
    SystemConfig cfg;
    cfg.tilt_angles = {0.0};
    cfg.azimuth_angles = {0.0};
    ChannelTensor h(static_cast<std::size_t>(cfg.n_t()), 3, 2);
    const cdouble c{0.3, -1.2};
    std::fill(h.data().begin(), h.data().end(), c);
    const BeamformedChannel out = beamform(h, 0, 0, cfg);
    CHECK(out.h.rows() == 3);
    CHECK(out.h.cols() == 2);
    for (Eigen::Index f = 0; f < 3; ++f)
        for (Eigen::Index t = 0; t < 2; ++t)
            CHECK(std::abs(out.h(f, t) - c * static_cast<double>(cfg.n_t())) < 1e-12);
}

TEST_CASE("beamform: single-antenna array passes the channel through")
{
    SystemConfig cfg;
    cfg.n1 = 1;
    cfg.n2 = 1;
    std::mt19937_64 rng(4);
    const ChannelTensor h = random_tensor(rng, 1, 5, 3);
    const BeamformedChannel out = beamform(h, 1, 2, cfg);
    for (std::size_t f = 0; f < 5; ++f)
        for (std::size_t t = 0; t < 3; ++t)
            CHECK(std::abs(out.h(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) - h(0, f, t)) < 1e-15);
}

TEST_CASE("beamform: matches a brute-force element loop and is linear")
{
    const SystemConfig cfg;
    std::mt19937_64 rng(9);
    const ChannelTensor h1 = random_tensor(rng, 64, 6, 2);
    const ChannelTensor h2 = random_tensor(rng, 64, 6, 2);
    const BeamformedChannel out = beamform(h1, 0, 2, cfg);
    for (std::size_t f = 0; f < 6; ++f)
        for (std::size_t t = 0; t < 2; ++t)
        {
            const cdouble oracle = naive_beam(h1, f, t, deg2rad(7.0), deg2rad(15.0), cfg);
            CHECK(std::abs(out.h(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t)) - oracle) <
                  1e-12 * std::max(1.0, std::abs(oracle)));
        }

    const cdouble a{0.7, -0.2}, b{-1.5, 0.4};
    ChannelTensor mix(64, 6, 2);
    for (std::size_t k = 0; k < mix.data().size(); ++k)
        mix.data()[k] = a * h1.data()[k] + b * h2.data()[k];
    const auto lhs = beamform(mix, 1, 3, cfg).h;
    const auto rhs = (a * beamform(h1, 1, 3, cfg).h + b * beamform(h2, 1, 3, cfg).h).eval();
    CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());

    CHECK_THROWS_AS(beamform(random_tensor(rng, 8, 2, 1), 0, 0, cfg), ConfigError);
    CHECK_THROWS_AS(beamform(h1, 2, 0, cfg), ConfigError);
}

TEST_CASE("select_strongest_beam: matched steering, tie-break, brute-force scan, scale invariance")
{
    const SystemConfig cfg;
    // Channel equal to the conjugate weights of beam (12 deg, 45 deg).
    ChannelTensor matched(64, 4, 2);
    const Eigen::VectorXcd vv = steering_vector(deg2rad(12.0), cfg.n1, cfg.d_v);
    const Eigen::VectorXcd vh = steering_vector(deg2rad(45.0), cfg.n2, cfg.d_h);
    for (std::size_t f = 0; f < 4; ++f)
        for (std::size_t t = 0; t < 2; ++t)
            for (int c = 0; c < cfg.n2; ++c)
                for (int r = 0; r < cfg.n1; ++r)
                    matched(static_cast<std::size_t>(c * cfg.n1 + r), f, t) = std::conj(vh(c) * vv(r));
    CHECK(select_strongest_beam(matched, cfg) == BeamIndex{1, 3});

    // Energy only on the reference element: every beam has equal power.
    ChannelTensor iso(64, 4, 2);
    for (std::size_t f = 0; f < 4; ++f)
        for (std::size_t t = 0; t < 2; ++t)
            iso(0, f, t) = {1.0, 0.0};
    CHECK(select_strongest_beam(iso, cfg) == BeamIndex{0, 0});

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial)
    {
        ChannelTensor h = random_tensor(rng, 64, 5, 3);
        BeamIndex best;
        double best_p = -1.0;
        for (std::size_t iv = 0; iv < 2; ++iv)
            for (std::size_t ih = 0; ih < 4; ++ih)
            {
                double p = 0.0;
                for (std::size_t f = 0; f < 5; ++f)
                    for (std::size_t t = 0; t < 3; ++t)
                        p += std::norm(naive_beam(h, f, t, cfg.tilt_angles[iv], cfg.azimuth_angles[ih], cfg));
                if (p > best_p)
                {
                    best_p = p;
                    best = {iv, ih};
                }
            }
        CHECK(select_strongest_beam(h, cfg) == best);
        for (auto &z : h.data())
            z *= cdouble{-2.5, 1.5};
        CHECK(select_strongest_beam(h, cfg) == best);
    }
}

TEST_CASE("synth_freq_response: flat, ramp and cancellation")
{
    const SystemConfig cfg;
    MpcParamSet t;
    t.mpcs = {{0.0, 1.0, 0.0}};
    const Eigen::VectorXcd flat = synth_freq_response(t, cfg);
    REQUIRE(flat.size() == 50);
    for (Eigen::Index m = 0; m < 50; ++m)
        CHECK(std::abs(flat(m) - cdouble{1.0, 0.0}) < 1e-15);
    t.mpcs = {{1e-7, 1.0, 0.0}};
    const Eigen::VectorXcd ramp = synth_freq_response(t, cfg);
    for (Eigen::Index m = 0; m < 50; ++m)
        CHECK(std::abs(ramp(m) - std::exp(cdouble{0.0, -two_pi * static_cast<double>(m) * 180e3 * 1e-7})) < 1e-12);
    t.mpcs = {{2e-7, 0.8, 0.4}, {2e-7, 0.8, 0.4 + pi}};
    CHECK(synth_freq_response(t, cfg).norm() < 1e-12);
}

TEST_CASE("generate_dataset: determinism, delay range and separation")
{
    const SystemConfig cfg;
    DatasetSpec spec;
    spec.n_channels = 300;
    spec.rng_seed = 77;
    const auto a = generate_dataset(spec, cfg, 2);
    const auto b = generate_dataset(spec, cfg, 1);
    REQUIRE(a.size() == 300);
    const double ts = cfg.sample_period();
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        CHECK(a[k].theta == b[k].theta);
        CHECK(a[k].cir.samples == b[k].cir.samples);
        CHECK(a[k].cir.samples.size() == static_cast<std::size_t>(cfg.obs_window_w));
        const auto &m = a[k].theta.mpcs;
        CHECK(m.size() >= 1);
        CHECK(m.size() <= 3);
        double a_max = 0.0;
        for (std::size_t l = 0; l < m.size(); ++l)
        {
            CHECK(m[l].tau >= 15e-9 * (1.0 - 1e-12));
            CHECK(m[l].tau <= 500e-9 * (1.0 + 1e-12));
            CHECK(m[l].phi >= 0.0);
            CHECK(m[l].phi < two_pi);
            a_max = std::max(a_max, m[l].alpha);
            if (l > 0)
                CHECK(m[l].tau - m[l - 1].tau >= 0.5 * ts * (1.0 - 1e-9));
        }
        CHECK(a_max == 1.0);
    }
    spec.n_channels = 1;
    CHECK(generate_dataset(spec, cfg)[0].theta == generate_dataset(spec, cfg)[0].theta);
}

TEST_CASE("generate_dataset: infeasible separation and invalid ranges are rejected")
{
    const SystemConfig cfg;
    DatasetSpec spec;
    spec.n_channels = 5;
    spec.model_order_min = spec.model_order_max = 4;
    spec.delay_min = 0.15;
    spec.delay_max = 1.0;
    spec.min_separation = 1.0;
    CHECK_THROWS_AS(generate_dataset(spec, cfg), GenerationError);
    DatasetSpec bad;
    bad.delay_max = 60.0;
    CHECK_THROWS_AS(bad.validate(cfg), ConfigError);
}

TEST_CASE("generate_dataset: empirical SNR of the noisy CIR")
{
    const SystemConfig cfg;
    DatasetSpec clean;
    clean.n_channels = 1000;
    clean.rng_seed = 5;
    DatasetSpec noisy = clean;
    noisy.snr_db = 20.0;
    const auto c = generate_dataset(clean, cfg);
    const auto n = generate_dataset(noisy, cfg);
    double mean_db = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
    {
        REQUIRE(c[k].theta == n[k].theta);
        double ps = 0.0, pn = 0.0;
        for (std::size_t i = 0; i < c[k].cir.samples.size(); ++i)
        {
            ps += std::norm(c[k].cir.samples[i]);
            pn += std::norm(n[k].cir.samples[i] - c[k].cir.samples[i]);
        }
        mean_db += 10.0 * std::log10(ps / pn);
    }
    mean_db /= static_cast<double>(c.size());
    CHECK(std::abs(mean_db - 20.0) <= 0.5);
}

TEST_CASE("dataset files: round trip, byte-identical reruns and overwrite protection")
{
    Dataset ds;
    ds.spec.n_channels = 4;
    ds.spec.rng_seed = 3;
    ds.spec.snr_db = 15.0;
    ds.entries = generate_dataset(ds.spec, ds.cfg);
    const auto dir = scratch_dir("dataset");
    write_dataset(dir, "a", ds, false);
    write_dataset(dir, "b", ds, false);
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
    CHECK_THROWS_AS(write_dataset(dir, "a", ds, false), UsageError);
    CHECK_NOTHROW(write_dataset(dir, "a", ds, true));

    const Dataset back = read_dataset(dir / "a.json");
    CHECK(back.spec.n_channels == 4);
    CHECK(back.spec.snr_db.value() == 15.0);
    REQUIRE(back.entries.size() == 4);
    for (std::size_t k = 0; k < 4; ++k)
    {
        CHECK(back.entries[k].theta == ds.entries[k].theta);
        CHECK(back.entries[k].cir.samples == ds.entries[k].cir.samples);
        CHECK(back.entries[k].profile.samples == ds.entries[k].profile.samples);
    }

    // Layout: L, L triples, then 2 W interleaved values, all binary64.
    std::size_t expected = 0;
    for (const auto &e : ds.entries)
        expected += 8 * (1 + 3 * e.theta.size() + 2 * static_cast<std::size_t>(ds.cfg.obs_window_w));
    CHECK(std::filesystem::file_size(dir / "a.bin") == expected);

    std::ofstream(dir / "a.bin", std::ios::binary | std::ios::trunc) << "short";
    CHECK_THROWS_AS(read_dataset(dir / "a.json"), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("system config and spec JSON round trip")
{
    SystemConfig cfg;
    cfg.n_st = 8;
    cfg.obs_window_w = 300;
    const SystemConfig back = system_config_from_json(to_json(cfg));
    CHECK(back.n_st == 8);
    CHECK(back.obs_window_w == 300);
    CHECK(back.tilt_angles == cfg.tilt_angles);
    DatasetSpec spec;
    spec.amplitude_spread_db = 10.0;
    spec.on_lattice = true;
    const DatasetSpec sb = dataset_spec_from_json(to_json(spec));
    CHECK(sb.amplitude_spread_db.value() == 10.0);
    CHECK(sb.on_lattice);
    CHECK_THROWS_AS(system_config_from_json(nlohmann::json{{"n_st", "six"}}), ConfigError);
    SystemConfig bad;
    bad.obs_window_w = 400;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
