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
#include "mpcprof/estimator.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace mpcprof;
using namespace mpcprof::testing;

namespace
{

struct Fixture
{
    SystemConfig cfg;
    QuantizerSpec q = QuantizerSpec::defaults(cfg);
    SincBank bank{cfg};
    SearchSchedule schedule = SearchSchedule::defaults(cfg);
    EstimatorContext ctx{cfg, q, bank, schedule};

    std::size_t w() const { return static_cast<std::size_t>(cfg.obs_window_w); }

    ProfiledCir target_of(const MpcParamSet &theta) const { return reconstruct(theta, cfg, q, bank, w()); }

    double loss_db(const MpcParamSet &est, const ProfiledCir &target) const
    {
        return loss_to_db(profiling_loss(target, reconstruct(est, cfg, q, bank, target.size())));
    }
};

MpcParamSet single(double tau, double alpha, double phi)
{
    MpcParamSet t;
    t.mpcs.push_back({tau, alpha, phi});
    return t;
}

} // namespace

TEST_CASE("schedule: defaults are ordered and validated")
{
    const Fixture f;
    CHECK_NOTHROW(f.schedule.validate(f.q));
    CHECK(f.schedule.at(SearchLevel::fine).tau == f.q.delay_step);
    SearchSchedule bad = f.schedule;
    bad.steps[2].tau = 2.0 * bad.steps[1].tau;
    CHECK_THROWS_AS(bad.validate(f.q), ConfigError);
    bad = f.schedule;
    bad.steps[2].tau = 0.5 * f.q.delay_step;
    CHECK_THROWS_AS(bad.validate(f.q), ConfigError);
    CHECK_NOTHROW(SearchSchedule::preset("fast", f.cfg).validate(f.q));
    CHECK_THROWS_AS(SearchSchedule::preset("nope", f.cfg), UsageError);
}

TEST_CASE("refine: an offset of one step is undone; the move equals the exhaustive 27-candidate argmin")
{
    const Fixture f;
    const SearchSteps &d = f.schedule.at(SearchLevel::medium);
    const MpcParamSet truth = on_lattice(single(2.0 * f.cfg.sample_period(), 0.8, 1.0), f.q);
    const ProfiledCir target = f.target_of(truth);
    MpcParamSet start = truth;
    start.mpcs[0].tau += d.tau;

    // Oracle: score every variation with reconstruct + window_error.
    double best = 0.0;
    int best_index = -1;
    for (int it = 0; it < 3; ++it)
        for (int ia = 0; ia < 3; ++ia)
            for (int ip = 0; ip < 3; ++ip)
            {
                MpcParamSet c = start;
                c.mpcs[0].tau += (it - 1) * d.tau;
                c.mpcs[0].alpha = std::max(0.0, c.mpcs[0].alpha + (ia - 1) * d.alpha);
                c.mpcs[0].phi += (ip - 1) * d.phi;
                const double s = window_error(target, f.target_of(c), 1, f.w());
                if (best_index < 0 || s < best)
                {
                    best = s;
                    best_index = it * 9 + ia * 3 + ip;
                }
            }
    CHECK(best_index == 0 * 9 + 1 * 3 + 1);

    const MpcParamSet out = refine(start, target, SearchLevel::medium, f.ctx);
    CHECK(std::abs(out.mpcs[0].tau - truth.mpcs[0].tau) < 1e-9 * d.tau);
    CHECK(out.mpcs[0].alpha == truth.mpcs[0].alpha);
    CHECK(out.mpcs[0].phi == Catch::Approx(truth.mpcs[0].phi));
}

TEST_CASE("refine: the optimum is a fixed point")
{
    const Fixture f;
    MpcParamSet truth;
    truth.mpcs = {{1.0 * f.cfg.sample_period(), 1.0, 0.5}, {3.0 * f.cfg.sample_period(), 0.5, 2.0}};
    truth = on_lattice(truth, f.q);
    const ProfiledCir target = f.target_of(truth);
    for (const SearchLevel lvl : {SearchLevel::coarse, SearchLevel::medium, SearchLevel::fine})
        CHECK(refine(truth, target, lvl, f.ctx) == truth);
}

TEST_CASE("refine: the windowed score never increases (random property)")
{
    const Fixture f;
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial)
    {
        const MpcParamSet truth = random_params(rng, f.cfg, 1 + trial % 3, 0.2, 5.0);
        const ProfiledCir target = f.target_of(truth);
        MpcParamSet theta = random_params(rng, f.cfg, truth.size(), 0.2, 5.0);
        const auto level = static_cast<SearchLevel>(trial % 3);
        const double before = windowed_score(theta, target, f.ctx);
        const MpcParamSet after = refine(theta, target, level, f.ctx);
        CHECK(windowed_score(after, target, f.ctx) <= before);
    }
}

TEST_CASE("estimate_initial: single on-lattice path reaches the exact optimum")
{
    const Fixture f;
    const MpcParamSet truth = on_lattice(single(3.3 * f.cfg.sample_period(), 0.7, 4.0), f.q);
    const ProfiledCir target = f.target_of(truth);
    const EstimateReport rep = estimate_initial(target, 1, f.ctx);
    CHECK(rep.loss_db <= -60.0);
    CHECK(rep.loss_db == Catch::Approx(f.loss_db(rep.theta_hat, target)).margin(1e-9));
    CHECK(rep.elapsed_s >= 0.0);
}

TEST_CASE("estimate_initial: noiseless three-path targets with T_s separation")
{
    const Fixture f;
    const double ts = f.cfg.sample_period();
    const std::vector<MpcParamSet> cases = {
        {{{0.7 * ts, 1.0, 0.4}, {2.1 * ts, 0.6, 3.0}, {3.6 * ts, 0.3, 5.5}}, 0},
        {{{0.3 * ts, 0.5, 1.0}, {1.4 * ts, 1.0, 2.0}, {4.2 * ts, 0.8, 0.1}}, 0},
        {{{1.0 * ts, 1.0, 6.0}, {2.0 * ts, 0.9, 3.1}, {3.05 * ts, 0.7, 1.5}}, 0},
    };
    for (const auto &truth : cases)
    {
        ProfiledCir target = profile(sample_cir(truth, f.cfg));
        target.samples.resize(f.w());
        const EstimateReport rep = estimate_initial(target, 3, f.ctx);
        CHECK(rep.loss_db <= -40.0);
        CHECK(std::is_sorted(rep.theta_hat.mpcs.begin(), rep.theta_hat.mpcs.end(),
                             [](const Mpc &a, const Mpc &b) { return a.tau < b.tau; }));
        for (const Mpc &p : rep.theta_hat.mpcs)
        {
            CHECK(p.phi >= 0.0);
            CHECK(p.phi < two_pi);
        }
    }
}

TEST_CASE("estimate_initial: a surplus component fades to a negligible amplitude")
{
    const Fixture f;
    const MpcParamSet truth = on_lattice(single(2.0 * f.cfg.sample_period(), 1.0, 0.0), f.q);
    const ProfiledCir target = f.target_of(truth);
    const EstimateReport rep = estimate_initial(target, 2, f.ctx);
    REQUIRE(rep.theta_hat.size() == 2);
    const double weakest = std::min(rep.theta_hat.mpcs[0].alpha, rep.theta_hat.mpcs[1].alpha);
    CHECK(rep.loss_db <= -60.0);
    CHECK(weakest < 10.0 * f.q.amp_step);
}

TEST_CASE("estimate_initial: seed permutations give the same result; runs are deterministic")
{
    const Fixture f;
    const double ts = f.cfg.sample_period();
    MpcParamSet truth;
    truth.mpcs = {{0.8 * ts, 1.0, 1.0}, {2.2 * ts, 0.5, 4.0}, {3.9 * ts, 0.7, 2.5}};
    truth = on_lattice(truth, f.q);
    const ProfiledCir target = f.target_of(truth);
    MpcParamSet seed;
    seed.mpcs = {{1.0 * ts, 0.9, 0.0}, {2.0 * ts, 0.4, 0.0}, {4.0 * ts, 0.6, 0.0}};
    const EstimateReport a = estimate_initial(target, 3, f.ctx, seed);
    std::reverse(seed.mpcs.begin(), seed.mpcs.end());
    const EstimateReport b = estimate_initial(target, 3, f.ctx, seed);
    std::rotate(seed.mpcs.begin(), seed.mpcs.begin() + 1, seed.mpcs.end());
    const EstimateReport c = estimate_initial(target, 3, f.ctx, seed);
    CHECK(std::abs(a.loss_db - b.loss_db) <= 1e-9);
    CHECK(std::abs(a.loss_db - c.loss_db) <= 1e-9);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.theta_hat == c.theta_hat);
    CHECK(estimate_initial(target, 3, f.ctx).theta_hat == estimate_initial(target, 3, f.ctx).theta_hat);
}

TEST_CASE("estimate_initial: model order above the configured maximum is rejected")
{
    const Fixture f;
    const ProfiledCir target = f.target_of(single(1e-7, 1.0, 0.0));
    CHECK_THROWS_AS(estimate_initial(target, 17, f.ctx), ConfigError);
    CHECK_THROWS_AS(estimate_initial(target, 0, f.ctx), ConfigError);
}

TEST_CASE("track: static channel keeps the estimate")
{
    const Fixture f;
    MpcParamSet truth;
    truth.mpcs = {{1.2 * f.cfg.sample_period(), 1.0, 0.3}, {2.9 * f.cfg.sample_period(), 0.4, 2.2}};
    truth = on_lattice(truth, f.q);
    const ProfiledCir target = f.target_of(truth);
    const EstimateReport rep = track(truth, target, f.ctx);
    CHECK(rep.theta_hat.mpcs == truth.mpcs);
    CHECK(rep.loss_db == loss_db_floor);
    CHECK_FALSE(rep.track_lost);
}

TEST_CASE("track: a path drifting by 0.1 T_s per step stays below -35 dB")
{
    const Fixture f;
    const double ts = f.cfg.sample_period();
    MpcParamSet prev = single(1.0 * ts, 0.9, 1.0);
    for (int step = 1; step <= 10; ++step)
    {
        const MpcParamSet truth = single((1.0 + 0.1 * step) * ts, 0.9, 1.0);
        ProfiledCir target = profile(sample_cir(truth, f.cfg));
        target.samples.resize(f.w());
        const EstimateReport rep = track(prev, target, f.ctx);
        CHECK(rep.loss_db <= -35.0);
        prev = rep.theta_hat;
    }
}

TEST_CASE("track: identity is preserved and moves stay inside the tracking box")
{
    const Fixture f;
    const double ts = f.cfg.sample_period();
    std::mt19937_64 rng(8);
    const SearchSteps &m = f.schedule.at(SearchLevel::medium);
    const double r = f.schedule.tracking_radius;
    for (int trial = 0; trial < 20; ++trial)
    {
        MpcParamSet prev = random_params(rng, f.cfg, 3, 0.5, 5.0);
        // Deliberately unsorted input: identity must follow the index.
        std::swap(prev.mpcs[0], prev.mpcs[2]);
        MpcParamSet moved = prev;
        for (Mpc &p : moved.mpcs)
            p.tau += 0.05 * ts;
        const ProfiledCir target = f.target_of(moved);
        const EstimateReport rep = track(prev, target, f.ctx);
        REQUIRE(rep.theta_hat.size() == 3);
        for (std::size_t l = 0; l < 3; ++l)
        {
            const Mpc &a = prev.mpcs[l];
            const Mpc &b = rep.theta_hat.mpcs[l];
            CHECK(std::abs(b.tau - a.tau) <= r * m.tau * (1.0 + 1e-9));
            CHECK(std::abs(b.alpha - a.alpha) <= r * m.alpha * (1.0 + 1e-9));
            CHECK(std::abs(wrap_pi(b.phi - a.phi)) <= r * m.phi * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("track: a jump beyond the radius is flagged; an empty target signals track loss")
{
    const Fixture f;
    const double ts = f.cfg.sample_period();
    const MpcParamSet prev = single(1.0 * ts, 1.0, 0.0);
    const ProfiledCir jumped = f.target_of(single(4.0 * ts, 1.0, 0.0));
    const EstimateReport rep = track(prev, jumped, f.ctx);
    CHECK((rep.track_lost || rep.loss_db > -10.0));
    CHECK(rep.track_lost);

    ProfiledCir empty;
    empty.samples.assign(f.w(), 0.0);
    CHECK_THROWS_AS(track(prev, empty, f.ctx), TrackLostError);
}
