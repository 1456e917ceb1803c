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

#include "mpcprof/estimator.hpp"

#include "mpcprof/errors.hpp"
#include "mpcprof/initializer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mpcprof
{

const char *to_string(SearchLevel level)
{
    switch (level)
    {
    case SearchLevel::coarse:
        return "coarse";
    case SearchLevel::medium:
        return "medium";
    case SearchLevel::fine:
        return "fine";
    }
    return "?";
}

SearchSchedule SearchSchedule::defaults(const SystemConfig &cfg)
{
    const double ts = cfg.sample_period();
    const QuantizerSpec q = QuantizerSpec::defaults(cfg);
    SearchSchedule s;
    s.steps[0] = {ts / 4.0, 0.05, pi / 8.0};
    s.steps[1] = {ts / 24.0, 0.01, pi / 64.0};
    s.steps[2] = {q.delay_step, q.amp_step, q.phase_step};
    return s;
}

SearchSchedule SearchSchedule::preset(const std::string &name, const SystemConfig &cfg)
{
    SearchSchedule s = defaults(cfg);
    if (name == "standard")
        return s;
    if (name == "fast")
    {
        const double ts = cfg.sample_period();
        s.steps[0] = {ts / 2.0, 0.1, pi / 8.0};
        s.steps[1] = {ts / 8.0, 0.02, pi / 32.0};
        s.steps[2] = {ts / 32.0, 0.005, pi / 128.0};
        return s;
    }
    throw UsageError("unknown schedule preset '" + name + "' (expected standard or fast)");
}

void SearchSchedule::validate(const QuantizerSpec &q) const
{
    for (const SearchSteps &st : steps)
        if (!(st.tau > 0.0) || !(st.alpha > 0.0) || !(st.phi > 0.0))
            throw ConfigError("search schedule: all steps must be > 0");
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (steps[k].tau > steps[k - 1].tau || steps[k].alpha > steps[k - 1].alpha || steps[k].phi > steps[k - 1].phi)
            throw ConfigError("search schedule: steps must not grow from coarse to fine");
    // Relative slack absorbs the rounding of T_s / n expressions.
    if (steps[2].tau < q.delay_step * (1.0 - 1e-9))
        throw ConfigError("search schedule: fine delay step below the quantizer delay step");
    if (max_iterations_per_level < 1 || !(convergence_tol >= 0.0) || !(tracking_radius > 0.0))
        throw ConfigError("search schedule: invalid iteration controls");
}

namespace
{

struct Window
{
    std::size_t first = 1; // 1-based tap
    std::size_t n = 0;
};

Window resolve_window(const SearchSchedule &s, const SystemConfig &cfg, const ProfiledCir &target)
{
    std::size_t stop = s.w_stop == 0 ? static_cast<std::size_t>(cfg.obs_window_w) : s.w_stop;
    stop = std::min(stop, target.size());
    if (s.w_start < 1 || s.w_start > stop)
        throw DomainError("estimator: evaluation window [" + std::to_string(s.w_start) + ", " + std::to_string(stop) +
                          "] is empty for a target of " + std::to_string(target.size()) + " taps");
    return {s.w_start, stop - s.w_start + 1};
}

struct Box
{
    std::vector<Mpc> centre;
    SearchSteps half_width;
};

bool inside(const Box *box, std::size_t l, double tau, double alpha, double phi)
{
    if (!box)
        return true;
    const Mpc &c = box->centre[l];
    const double slack = 1e-9;
    return std::abs(tau - c.tau) <= box->half_width.tau * (1.0 + slack) &&
           std::abs(alpha - c.alpha) <= box->half_width.alpha * (1.0 + slack) &&
           std::abs(wrap_pi(phi - c.phi)) <= box->half_width.phi * (1.0 + slack);
}

// Sweep order and summation order: strongest first, then by delay and phase.
// Depends only on parameter values, never on positions in the set.
std::vector<std::size_t> canonical_order(const MpcParamSet &theta)
{
    std::vector<std::size_t> order(theta.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Mpc &pa = theta.mpcs[a];
        const Mpc &pb = theta.mpcs[b];
        if (pa.alpha != pb.alpha)
            return pa.alpha > pb.alpha;
        if (pa.tau != pb.tau)
            return pa.tau < pb.tau;
        return pa.phi < pb.phi;
    });
    return order;
}

/// Incremental evaluator of the windowed error for single-component moves.
class Sweeper
{
public:
    Sweeper(const ProfiledCir &target, const EstimatorContext &ctx, Window win)
        : ctx_(ctx), win_(win), target_(target.samples.begin() + static_cast<std::ptrdiff_t>(win.first - 1),
                                        target.samples.begin() + static_cast<std::ptrdiff_t>(win.first - 1 + win.n))
    {
        rest_.resize(win_.n);
        for (auto &r : resp_)
            r.resize(win_.n);
    }

    // Returns true when any component moved.
    bool sweep(MpcParamSet &theta, const SearchSteps &d, const Box *box)
    {
        const std::size_t n_paths = theta.size();
        contrib_.resize(n_paths);
        for (std::size_t l = 0; l < n_paths; ++l)
            component(theta.mpcs[l], contrib_[l]);

        bool moved = false;
        const std::vector<std::size_t> order = canonical_order(theta);
        for (const std::size_t l : order)
        {
            std::fill(rest_.begin(), rest_.end(), cdouble{0.0, 0.0});
            for (const std::size_t j : order)
                if (j != l)
                    for (std::size_t k = 0; k < win_.n; ++k)
                        rest_[k] += contrib_[j][k];

            Mpc &p = theta.mpcs[l];
            std::array<bool, 3> tau_ok{};
            for (int it = 0; it < 3; ++it)
            {
                const double tau = p.tau + (it - 1) * d.tau;
                tau_ok[it] = tau >= 0.0 && tau < ctx_.cfg.max_delay();
                if (tau_ok[it])
                    path_response(ctx_.q.delay(tau), ctx_.cfg, ctx_.bank, win_.first, win_.n, resp_[it]);
            }

            constexpr int zero_index = 13;
            double best_score = 0.0;
            int best_index = -1;
            double zero_score = 0.0;
            for (int it = 0; it < 3; ++it)
            {
                if (!tau_ok[it])
                    continue;
                const double tau = p.tau + (it - 1) * d.tau;
                for (int ia = 0; ia < 3; ++ia)
                {
                    const double alpha = std::max(p.alpha + (ia - 1) * d.alpha, 0.0);
                    for (int ip = 0; ip < 3; ++ip)
                    {
                        const int index = it * 9 + ia * 3 + ip;
                        const double phi = p.phi + (ip - 1) * d.phi;
                        if (index != zero_index && !inside(box, l, tau, alpha, phi))
                            continue;
                        const double score = score_candidate(resp_[it], alpha, phi);
                        if (index == zero_index)
                            zero_score = score;
                        else if (best_index < 0 || score < best_score)
                        {
                            best_score = score;
                            best_index = index;
                        }
                    }
                }
            }

            // A move has to beat the zero variation by more than rounding noise.
            if (best_index >= 0 && best_score < zero_score * (1.0 - 1e-12))
            {
                const int it = best_index / 9;
                const int ia = (best_index / 3) % 3;
                const int ip = best_index % 3;
                p.tau += (it - 1) * d.tau;
                p.alpha = std::max(p.alpha + (ia - 1) * d.alpha, 0.0);
                p.phi = wrap_phase(p.phi + (ip - 1) * d.phi);
                component(p, contrib_[l]);
                moved = true;
            }
        }
        return moved;
    }

    // Exhaustive search for component l over the given grids with all other
    // components fixed. Returns the best score; `best` receives the move.
    // Delays closer than `exclude` to the current delay are skipped.
    double relocate(const MpcParamSet &theta, std::size_t l, const std::vector<double> &taus,
                    const std::vector<double> &alphas, const std::vector<double> &phis, double exclude, Mpc &best)
    {
        std::fill(rest_.begin(), rest_.end(), cdouble{0.0, 0.0});
        std::vector<cdouble> c;
        for (const std::size_t j : canonical_order(theta))
            if (j != l)
            {
                component(theta.mpcs[j], c);
                for (std::size_t k = 0; k < win_.n; ++k)
                    rest_[k] += c[k];
            }
        double best_score = std::numeric_limits<double>::infinity();
        for (const double tau : taus)
        {
            if (std::abs(tau - theta.mpcs[l].tau) < exclude)
                continue;
            path_response(ctx_.q.delay(tau), ctx_.cfg, ctx_.bank, win_.first, win_.n, resp_[0]);
            for (const double alpha : alphas)
                for (const double phi : phis)
                {
                    const double sc = score_candidate(resp_[0], alpha, phi);
                    if (sc < best_score)
                    {
                        best_score = sc;
                        best = {tau, alpha, phi};
                    }
                }
        }
        return best_score;
    }

    double score(const MpcParamSet &theta)
    {
        std::fill(rest_.begin(), rest_.end(), cdouble{0.0, 0.0});
        std::vector<cdouble> c;
        for (const std::size_t l : canonical_order(theta))
        {
            component(theta.mpcs[l], c);
            for (std::size_t k = 0; k < win_.n; ++k)
                rest_[k] += c[k];
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < win_.n; ++k)
        {
            const double e = target_[k] - std::abs(rest_[k]);
            acc += e * e;
        }
        return acc;
    }

private:
    void component(const Mpc &p, std::vector<cdouble> &out)
    {
        path_response(ctx_.q.delay(p.tau), ctx_.cfg, ctx_.bank, win_.first, win_.n, scratch_);
        const cdouble c = std::polar(ctx_.q.amplitude(std::max(p.alpha, 0.0)), ctx_.q.phase(p.phi));
        out.resize(win_.n);
        for (std::size_t k = 0; k < win_.n; ++k)
            out[k] = c * scratch_[k];
    }

    double score_candidate(const std::vector<double> &resp, double alpha, double phi) const
    {
        const cdouble c = std::polar(ctx_.q.amplitude(alpha), ctx_.q.phase(phi));
        double acc = 0.0;
        for (std::size_t k = 0; k < win_.n; ++k)
        {
            const double e = target_[k] - std::abs(rest_[k] + c * resp[k]);
            acc += e * e;
        }
        return acc;
    }

    const EstimatorContext &ctx_;
    Window win_;
    std::vector<double> target_;
    std::vector<cdouble> rest_;
    std::vector<std::vector<cdouble>> contrib_;
    std::array<std::vector<double>, 3> resp_;
    std::vector<double> scratch_;
};

int run_level(MpcParamSet &theta, Sweeper &sw, SearchLevel level, const EstimatorContext &ctx, const Box *box)
{
    const SearchSteps &d = ctx.schedule.at(level);
    double prev = sw.score(theta);
    int used = 0;
    while (used < ctx.schedule.max_iterations_per_level)
    {
        const bool moved = sw.sweep(theta, d, box);
        ++used;
        if (!moved)
            break;
        const double cur = sw.score(theta);
        if (prev - cur <= ctx.schedule.convergence_tol * prev)
            break;
        prev = cur;
    }
    return used;
}

void check_target(const ProfiledCir &target, Window win)
{
    for (std::size_t k = win.first - 1; k < win.first - 1 + win.n; ++k)
        if (target.samples[k] > 0.0)
            return;
    throw DomainError("estimator: target is zero inside the evaluation window");
}

void finish_report(EstimateReport &rep, const ProfiledCir &target, const EstimatorContext &ctx)
{
    const ProfiledCir recon = reconstruct(rep.theta_hat, ctx.cfg, ctx.q, ctx.bank, target.size());
    rep.loss_db = loss_to_db(profiling_loss(target, recon));
    rep.degenerate.clear();
    for (const Mpc &p : rep.theta_hat.mpcs)
        rep.degenerate.push_back(p.alpha < ctx.q.amp_step);
}

struct SearchGrid
{
    std::vector<double> taus;
    std::vector<double> alphas;
    std::vector<double> phis;
};

// Grid of the full-space search: delays every tap over the support of the
// target (plus two sample periods), amplitudes log-spaced up to the target
// peak, phases in 12 steps.
SearchGrid full_search_grid(const ProfiledCir &target, Window win, const SystemConfig &cfg)
{
    SearchGrid g;
    double peak = 0.0;
    for (std::size_t k = win.first - 1; k < win.first - 1 + win.n; ++k)
        peak = std::max(peak, target.samples[k]);
    std::size_t last = win.first;
    for (std::size_t k = win.first - 1; k < win.first - 1 + win.n; ++k)
        if (target.samples[k] > 0.05 * peak)
            last = k + 1;
    const double tau_end = std::min(cfg.tap_delay(last) + 2.0 * cfg.sample_period(), cfg.max_delay());
    for (double tau = 0.0; tau < tau_end; tau += cfg.tap_spacing())
        g.taus.push_back(tau);
    for (int k = 0; k < 12; ++k)
        g.alphas.push_back(peak * 1.2 * std::pow(0.02 / 1.2, k / 11.0));
    for (int k = 0; k < 12; ++k)
        g.phis.push_back(k * two_pi / 12.0);
    return g;
}

} // namespace

double windowed_score(const MpcParamSet &theta, const ProfiledCir &target, const EstimatorContext &ctx)
{
    const Window win = resolve_window(ctx.schedule, ctx.cfg, target);
    const ProfiledCir recon = reconstruct(theta, ctx.cfg, ctx.q, ctx.bank, target.size());
    return window_error(target, recon, win.first, win.first + win.n - 1);
}

MpcParamSet refine(const MpcParamSet &theta, const ProfiledCir &target, SearchLevel level, const EstimatorContext &ctx)
{
    const Window win = resolve_window(ctx.schedule, ctx.cfg, target);
    Sweeper sw(target, ctx, win);
    MpcParamSet out = theta;
    normalize(out);
    sw.sweep(out, ctx.schedule.at(level), nullptr);
    return out;
}

EstimateReport estimate_initial(const ProfiledCir &target, std::size_t model_order, const EstimatorContext &ctx,
                                const std::optional<MpcParamSet> &seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (model_order < 1 || model_order > ctx.schedule.max_model_order)
        throw ConfigError("estimate_initial: model order " + std::to_string(model_order) + " outside [1, " +
                          std::to_string(ctx.schedule.max_model_order) + "]");
    const Window win = resolve_window(ctx.schedule, ctx.cfg, target);
    check_target(target, win);

    EstimateReport rep;
    if (seed)
    {
        if (seed->size() != model_order)
            throw ConfigError("estimate_initial: seed size does not match the model order");
        rep.theta_hat = *seed;
    }
    else
    {
        PeakPickResult init = peak_pick_init(target, model_order, ctx.cfg);
        rep.theta_hat = std::move(init.theta);
        rep.seed_padded = init.padded;
    }
    rep.theta_hat.t_index = target.t_index;
    normalize(rep.theta_hat);

    Sweeper sw(target, ctx, win);
    auto coarse_to_medium = [&](MpcParamSet &theta) {
        rep.iterations_used[0] += run_level(theta, sw, SearchLevel::coarse, ctx, nullptr);
        rep.iterations_used[1] += run_level(theta, sw, SearchLevel::medium, ctx, nullptr);
    };
    coarse_to_medium(rep.theta_hat);

    const SearchGrid grid = full_search_grid(target, win, ctx.cfg);
    double current = sw.score(rep.theta_hat);
    for (std::size_t round = 0; round < model_order && current > 0.0; ++round)
    {
        bool improved = false;
        std::vector<std::size_t> order = canonical_order(rep.theta_hat);
        std::reverse(order.begin(), order.end());
        for (const std::size_t l : order)
        {
            Mpc moved;
            const double sc = sw.relocate(rep.theta_hat, l, grid.taus, grid.alphas, grid.phis,
                                          0.5 * ctx.cfg.sample_period(), moved);
            if (!std::isfinite(sc))
                continue;
            MpcParamSet cand = rep.theta_hat;
            cand.mpcs[l] = moved;
            coarse_to_medium(cand);
            const double after = sw.score(cand);
            if (after < current * (1.0 - 1e-9))
            {
                rep.theta_hat = std::move(cand);
                current = after;
                improved = true;
            }
        }
        if (!improved)
            break;
    }
    rep.iterations_used[2] = run_level(rep.theta_hat, sw, SearchLevel::fine, ctx, nullptr);

    sort_by_delay(rep.theta_hat);
    finish_report(rep, target, ctx);
    rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

EstimateReport track(const MpcParamSet &prev, const ProfiledCir &target_next, const EstimatorContext &ctx)
{
    const auto t0 = std::chrono::steady_clock::now();
    const Window win = resolve_window(ctx.schedule, ctx.cfg, target_next);
    double energy = 0.0;
    for (std::size_t k = win.first - 1; k < win.first - 1 + win.n; ++k)
        energy += target_next.samples[k] * target_next.samples[k];
    if (!(energy > ctx.schedule.track_energy_floor))
        throw TrackLostError("track: target energy " + std::to_string(energy) + " below floor");

    EstimateReport rep;
    rep.theta_hat = prev;
    rep.theta_hat.t_index = target_next.t_index;
    normalize(rep.theta_hat);

    const SearchSteps &ref = ctx.schedule.at(SearchLevel::medium);
    const double r = ctx.schedule.tracking_radius;
    const Box box{rep.theta_hat.mpcs, {r * ref.tau, r * ref.alpha, r * ref.phi}};

    Sweeper sw(target_next, ctx, win);
    for (const SearchLevel level : {SearchLevel::medium, SearchLevel::fine})
        rep.iterations_used[static_cast<std::size_t>(level)] = run_level(rep.theta_hat, sw, level, ctx, &box);

    finish_report(rep, target_next, ctx);
    rep.track_lost = rep.loss_db > ctx.schedule.track_lost_db;
    rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace mpcprof
