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

#include "mpcprof/errors.hpp"
#include "mpcprof/initializer.hpp"
#include "mpcprof/profiler.hpp"
#include "mpcprof/weight_bundle.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

using namespace mpcprof;
using namespace mpcprof::testing;

namespace
{

SystemConfig small_window_config()
{
    SystemConfig cfg;
    cfg.obs_window_w = 8;
    return cfg;
}

ComplexCir cir_from_magnitudes(const std::vector<double> &mags)
{
    ComplexCir cir;
    for (const double m : mags)
        cir.samples.emplace_back(m, 0.0);
    return cir;
}

// Routes the magnitude channel straight through every layer: conv taps pick
// one neighbour, the dense layers copy unit 0, and the output layer maps the
// surviving value v to (2 v, v, 0.5).
WeightBundle routing_network(std::size_t conv_tap)
{
    WeightBundle b = make_mpc_net(8, 1);
    b.tensors.at("conv1/kernel").values[(conv_tap * 2 + 0) * 12 + 0] = 1.0f;
    b.tensors.at("conv2/kernel").values[(1 * 12 + 0) * 12 + 0] = 1.0f;
    b.tensors.at("dense1/kernel").values[0] = 1.0f;
    b.tensors.at("dense2/kernel").values[0] = 1.0f;
    b.tensors.at("out/kernel").values[0 * 3 + 0] = 2.0f;
    b.tensors.at("out/kernel").values[0 * 3 + 1] = 1.0f;
    b.tensors.at("out/bias").values[2] = 0.5f;
    return b;
}

std::string serialize(const WeightBundle &b)
{
    std::ostringstream os(std::ios::binary);
    write_weight_bundle(os, b);
    return os.str();
}

WeightBundle parse(const std::string &bytes)
{
    std::istringstream is(bytes, std::ios::binary);
    return read_weight_bundle(is);
}

} // namespace

TEST_CASE("prepare_input: magnitude and phase per tap")
{
    const SystemConfig cfg = small_window_config();
    ComplexCir cir;
    cir.samples = {{2.0, 0.0}, {0.0, 3.0}, {-1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, {0.0, -1.0}, {-1.0, -1e-300}, {5, 5}};
    const NnInput in = prepare_input(cir, cfg);
    REQUIRE(in.window == 8);
    REQUIRE(in.values.size() == 16);
    CHECK(in.magnitude(0) == 2.0);
    CHECK(in.phase(0) == 0.0);
    CHECK(in.magnitude(1) == 3.0);
    CHECK(in.phase(1) == Catch::Approx(pi / 2));
    CHECK(in.phase(2) == Catch::Approx(pi));
    CHECK(in.magnitude(3) == 0.0);
    CHECK(in.phase(3) == 0.0);
    CHECK(in.phase(4) == Catch::Approx(pi / 4));
    CHECK(in.phase(5) == Catch::Approx(-pi / 2));
    // The -pi side of the branch cut is reported as +pi.
    CHECK(in.phase(6) == Catch::Approx(pi));
}

TEST_CASE("prepare_input: random taps agree with std::abs / std::arg")
{
    const SystemConfig cfg;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    ComplexCir cir;
    for (int k = 0; k < cfg.obs_window_w + 20; ++k)
        cir.samples.emplace_back(nd(rng), nd(rng));
    const NnInput in = prepare_input(cir, cfg);
    REQUIRE(in.window == static_cast<std::size_t>(cfg.obs_window_w));
    for (std::size_t k = 0; k < in.window; ++k)
    {
        CHECK(in.magnitude(k) == Catch::Approx(std::abs(cir.samples[k])).epsilon(1e-14));
        CHECK(in.phase(k) == Catch::Approx(std::arg(cir.samples[k])).epsilon(1e-14));
    }
}

TEST_CASE("prepare_input: short CIR is rejected")
{
    const SystemConfig cfg = small_window_config();
    ComplexCir cir;
    cir.samples.assign(7, {1.0, 0.0});
    CHECK_THROWS_AS(prepare_input(cir, cfg), DomainError);
}

TEST_CASE("nn_infer: zero weights give zero parameters")
{
    const SystemConfig cfg = small_window_config();
    const WeightBundle b = make_mpc_net(8, 3);
    const MpcParamSet theta = nn_infer(prepare_input(cir_from_magnitudes({1, 2, 3, 4, 5, 6, 7, 8}), cfg), b, cfg);
    REQUIRE(theta.size() == 3);
    for (const Mpc &p : theta.mpcs)
    {
        CHECK(p.tau == 0.0);
        CHECK(p.alpha == 0.0);
        CHECK(p.phi == 0.0);
    }
}

TEST_CASE("nn_infer: hand-computed routing network")
{
    const SystemConfig cfg = small_window_config();
    const std::vector<double> mags{0.1, 0.5, 0.2, 0.9, 0.3, 0.0, 0.4, 0.6};
    // Centre tap: pool 2 keeps {0.5, 0.9, 0.3, 0.6}, pool 4 keeps 0.9.
    const MpcParamSet theta = nn_infer(prepare_input(cir_from_magnitudes(mags), cfg), routing_network(1), cfg);
    REQUIRE(theta.size() == 1);
    CHECK(theta.mpcs[0].tau == Catch::Approx(1.8 * cfg.sample_period()).epsilon(1e-12));
    CHECK(theta.mpcs[0].alpha == Catch::Approx(0.9).epsilon(1e-12));
    CHECK(theta.mpcs[0].phi == Catch::Approx(pi / 2).epsilon(1e-12));
}

TEST_CASE("nn_infer: same padding shifts towards the correct neighbour")
{
    const SystemConfig cfg = small_window_config();
    const std::vector<double> last_only{0, 0, 0, 0, 0, 0, 0, 1};
    const NnInput in = prepare_input(cir_from_magnitudes(last_only), cfg);
    // Tap 0 reads the left neighbour: the final value falls off the window.
    CHECK(nn_infer(in, routing_network(0), cfg).mpcs[0].alpha == 0.0);
    CHECK(nn_infer(in, routing_network(1), cfg).mpcs[0].alpha == 1.0);
    CHECK(nn_infer(in, routing_network(2), cfg).mpcs[0].alpha == 1.0);
    const std::vector<double> first_only{1, 0, 0, 0, 0, 0, 0, 0};
    const NnInput in2 = prepare_input(cir_from_magnitudes(first_only), cfg);
    CHECK(nn_infer(in2, routing_network(0), cfg).mpcs[0].alpha == 1.0);
    CHECK(nn_infer(in2, routing_network(2), cfg).mpcs[0].alpha == 0.0);
}

TEST_CASE("nn_infer: outputs are clamped into the parameter domain")
{
    const SystemConfig cfg = small_window_config();
    WeightBundle b = make_mpc_net(8, 1);
    b.tensors.at("out/bias").values = {-3.0f, -1.0f, 3.0f};
    const MpcParamSet theta = nn_infer(prepare_input(cir_from_magnitudes({1, 1, 1, 1, 1, 1, 1, 1}), cfg), b, cfg);
    CHECK(theta.mpcs[0].tau == 0.0);
    CHECK(theta.mpcs[0].alpha == 0.0);
    CHECK(theta.mpcs[0].phi == Catch::Approx(pi).epsilon(1e-12));
    b.tensors.at("out/bias").values = {1e6f, 1.0f, 0.0f};
    const MpcParamSet far = nn_infer(prepare_input(cir_from_magnitudes({1, 1, 1, 1, 1, 1, 1, 1}), cfg), b, cfg);
    CHECK(far.mpcs[0].tau < cfg.max_delay());
}

TEST_CASE("nn_infer: shape mismatches are format errors")
{
    const SystemConfig cfg = small_window_config();
    const NnInput in = prepare_input(cir_from_magnitudes({1, 1, 1, 1, 1, 1, 1, 1}), cfg);
    CHECK_THROWS_AS(nn_infer(in, make_mpc_net(16, 1), cfg), FormatError);
    WeightBundle wrong_arch = make_mpc_net(8, 1);
    wrong_arch.architecture_id = "something-else";
    CHECK_THROWS_AS(nn_infer(in, wrong_arch, cfg), FormatError);
    WeightBundle wrong_order = make_mpc_net(8, 2);
    wrong_order.model_order = 3;
    CHECK_THROWS_AS(nn_infer(in, wrong_order, cfg), FormatError);
}

TEST_CASE("forward: non-finite weights raise a numeric error")
{
    const SystemConfig cfg = small_window_config();
    WeightBundle b = make_mpc_net(8, 1);
    b.tensors.at("out/bias").values[1] = std::numeric_limits<float>::quiet_NaN();
    const NnInput in = prepare_input(cir_from_magnitudes({1, 1, 1, 1, 1, 1, 1, 1}), cfg);
    CHECK_THROWS_AS(nn_infer(in, b, cfg), NumericError);
}

TEST_CASE("weight bundle: binary round trip preserves every tensor")
{
    WeightBundle b = make_mpc_net(256, 2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> ud(-1.0f, 1.0f);
    for (auto &[name, t] : b.tensors)
        for (float &v : t.values)
            v = ud(rng);
    const WeightBundle r = parse(serialize(b));
    CHECK(r.architecture_id == b.architecture_id);
    CHECK(r.model_order == 2);
    CHECK(r.input_window == 256);
    CHECK(r.flatten_length == b.flatten_length);
    REQUIRE(r.layers.size() == b.layers.size());
    for (std::size_t i = 0; i < b.layers.size(); ++i)
    {
        CHECK(r.layers[i].name == b.layers[i].name);
        CHECK(r.layers[i].kind == b.layers[i].kind);
        CHECK(r.layers[i].activation == b.layers[i].activation);
        CHECK(r.layers[i].pool == b.layers[i].pool);
    }
    REQUIRE(r.tensors.size() == b.tensors.size());
    for (const auto &[name, t] : b.tensors)
    {
        CHECK(r.tensor(name).shape == t.shape);
        CHECK(r.tensor(name).values == t.values);
    }
    // Serialization is deterministic.
    CHECK(serialize(r) == serialize(b));
}

TEST_CASE("weight bundle: classifier round trip")
{
    const WeightBundle b = make_dense_classifier(24, {32, 16}, 4);
    const WeightBundle r = parse(serialize(b));
    CHECK(r.n_classes == 4);
    CHECK(r.input_channels == 24);
    CHECK(r.check_chain() == 4);
}

TEST_CASE("weight bundle: corrupt input is rejected")
{
    const std::string good = serialize(make_mpc_net(8, 1));

    std::string bad_magic = good;
    bad_magic[0] = static_cast<char>(bad_magic[0] ^ 0x5a);
    CHECK_THROWS_AS(parse(bad_magic), FormatError);

    CHECK_THROWS_AS(parse(good.substr(0, 10)), FormatError);
    CHECK_THROWS_AS(parse(good.substr(0, good.size() - 4)), FormatError);

    std::string bad_json = good;
    bad_json[12] = '#';
    CHECK_THROWS_AS(parse(bad_json), FormatError);

    WeightBundle wrong_version = make_mpc_net(8, 1);
    wrong_version.format_version = 2;
    CHECK_THROWS_AS(parse(serialize(wrong_version)), FormatError);
}

TEST_CASE("weight bundle: inconsistent layer stacks are rejected")
{
    WeightBundle b = make_mpc_net(8, 1);
    b.flatten_length = 2;
    CHECK_THROWS_AS(b.check_chain(), FormatError);
    WeightBundle c = make_mpc_net(8, 1);
    c.tensors.at("dense2/kernel").shape = {49, 50};
    CHECK_THROWS_AS(c.check_chain(), FormatError);
    WeightBundle d = make_mpc_net(8, 1);
    d.tensors.erase("conv2/bias");
    CHECK_THROWS_AS(d.check_chain(), FormatError);
}

TEST_CASE("peak_pick: single on-grid path is recovered exactly")
{
    const SystemConfig cfg;
    const QuantizerSpec q = QuantizerSpec::defaults(cfg);
    const SincBank bank(cfg);
    MpcParamSet theta;
    theta.mpcs.push_back({cfg.tap_delay(30), 0.75, 1.0});
    const ProfiledCir prof = reconstruct(theta, cfg, q, bank, static_cast<std::size_t>(cfg.obs_window_w));
    const PeakPickResult r = peak_pick_init(prof, 1, cfg);
    REQUIRE(r.theta.size() == 1);
    CHECK_FALSE(r.padded);
    CHECK_FALSE(r.degenerate);
    CHECK(r.theta.mpcs[0].tau == Catch::Approx(cfg.tap_delay(30)).epsilon(1e-12));
    CHECK(r.theta.mpcs[0].alpha == Catch::Approx(q.amplitude(0.75)).epsilon(1e-9));
    CHECK(r.theta.mpcs[0].phi == 0.0);
}

TEST_CASE("peak_pick: two paths five sample periods apart")
{
    const SystemConfig cfg;
    const QuantizerSpec q = QuantizerSpec::defaults(cfg);
    const SincBank bank(cfg);
    MpcParamSet theta;
    theta.mpcs.push_back({cfg.tap_delay(24), 1.0, 0.3});
    theta.mpcs.push_back({cfg.tap_delay(24 + 5 * cfg.n_st), 0.5, 2.0});
    const ProfiledCir prof = reconstruct(theta, cfg, q, bank, static_cast<std::size_t>(cfg.obs_window_w));
    const PeakPickResult r = peak_pick_init(prof, 2, cfg);
    REQUIRE(r.theta.size() == 2);
    CHECK_FALSE(r.padded);
    CHECK(r.theta.mpcs[0].tau == Catch::Approx(theta.mpcs[0].tau).epsilon(1e-12));
    CHECK(r.theta.mpcs[1].tau == Catch::Approx(theta.mpcs[1].tau).epsilon(1e-12));
    CHECK(r.theta.mpcs[0].alpha == Catch::Approx(1.0).margin(1e-3));
    CHECK(r.theta.mpcs[1].alpha == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("peak_pick: degenerate and padded profiles")
{
    const SystemConfig cfg;
    ProfiledCir zero;
    zero.samples.assign(256, 0.0);
    const PeakPickResult z = peak_pick_init(zero, 3, cfg);
    CHECK(z.degenerate);
    CHECK(z.padded);
    CHECK(z.theta.size() == 3);

    ProfiledCir one_peak;
    one_peak.samples.assign(256, 0.0);
    one_peak.samples[40] = 1.0;
    const PeakPickResult p = peak_pick_init(one_peak, 2, cfg);
    CHECK(p.padded);
    CHECK_FALSE(p.degenerate);
    CHECK(p.theta.size() == 2);
    CHECK_THROWS_AS(peak_pick_init(one_peak, 0, cfg), DomainError);
}

TEST_CASE("peak_pick: result is sorted and within the delay domain")
{
    const SystemConfig cfg;
    const QuantizerSpec q = QuantizerSpec::defaults(cfg);
    const SincBank bank(cfg);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial)
    {
        const MpcParamSet theta = random_params(rng, cfg, 3, 0.5, 40.0);
        const ProfiledCir prof = reconstruct(theta, cfg, q, bank, static_cast<std::size_t>(cfg.obs_window_w));
        const PeakPickResult r = peak_pick_init(prof, 3, cfg);
        REQUIRE(r.theta.size() == 3);
        CHECK_NOTHROW(validate(r.theta, cfg));
    }
}
