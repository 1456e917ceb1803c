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

#include "mpcprof/scenario.hpp"

#include "mpcprof/channel_model.hpp"
#include "mpcprof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mpcprof
{

using nlohmann::json;

namespace
{

const char *law_name(LawKind k)
{
    switch (k)
    {
    case LawKind::constant: return "constant";
    case LawKind::linear: return "linear";
    case LawKind::quadratic: return "quadratic";
    case LawKind::sinusoidal: return "sinusoidal";
    }
    return "constant";
}

ParameterLaw law_from_json(const json &j, const char *what)
{
    ParameterLaw law;
    try
    {
        if (j.is_number())
        {
            law.c0 = j.get<double>();
            return law;
        }
        const std::string kind = j.value("law", std::string("constant"));
        if (kind == "constant")
            law.kind = LawKind::constant;
        else if (kind == "linear")
            law.kind = LawKind::linear;
        else if (kind == "quadratic")
            law.kind = LawKind::quadratic;
        else if (kind == "sinusoidal")
            law.kind = LawKind::sinusoidal;
        else
            throw ConfigError(std::string("scenario: unknown law '") + kind + "' for " + what);
        law.c0 = j.value("c0", 0.0);
        law.c1 = j.value("c1", 0.0);
        law.c2 = j.value("c2", 0.0);
        law.amplitude = j.value("amplitude", 0.0);
        law.period = j.value("period", 1.0);
        law.offset = j.value("offset", 0.0);
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("scenario: ") + what + ": " + e.what());
    }
    if (law.kind == LawKind::sinusoidal && !(law.period > 0.0))
        throw ConfigError(std::string("scenario: sinusoidal period must be positive for ") + what);
    return law;
}

json law_to_json(const ParameterLaw &l)
{
    return json{{"law", law_name(l.kind)}, {"c0", l.c0},           {"c1", l.c1},         {"c2", l.c2},
                {"amplitude", l.amplitude}, {"period", l.period}, {"offset", l.offset}};
}

Scenario random_start(const std::string &name, std::uint64_t seed, const BuiltinOptions &opt)
{
    Scenario s;
    s.name = name;
    s.seed = seed;
    s.on_lattice = opt.on_lattice;
    if (opt.n_paths == 0)
        throw ConfigError("scenario: n_paths must be at least 1");
    std::mt19937_64 rng = channel_rng(seed, 0);
    const double room = (opt.delay_max - opt.delay_min) - static_cast<double>(opt.n_paths - 1) * opt.min_separation;
    if (room < 0.0)
        throw ConfigError("scenario: delay range too small for the requested separation");
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<double> taus(opt.n_paths);
    for (double &t : taus)
        t = opt.delay_min + room * ud(rng);
    std::sort(taus.begin(), taus.end());
    s.paths.resize(opt.n_paths);
    for (std::size_t l = 0; l < opt.n_paths; ++l)
    {
        PathLaw &p = s.paths[l];
        p.tau.c0 = taus[l] + static_cast<double>(l) * opt.min_separation;
        p.alpha.c0 = 0.3 + 0.7 * ud(rng);
        p.phi.c0 = two_pi * ud(rng);
        p.phi.c1 = opt.phase_drift_max * (2.0 * ud(rng) - 1.0);
    }
    return s;
}

} // namespace

double ParameterLaw::operator()(double t) const
{
    switch (kind)
    {
    case LawKind::constant: return c0;
    case LawKind::linear: return c0 + c1 * t;
    case LawKind::quadratic: return c0 + c1 * t + c2 * t * t;
    case LawKind::sinusoidal: return c0 + amplitude * std::sin(two_pi * t / period + offset);
    }
    return c0;
}

void Scenario::validate() const
{
    if (paths.empty())
        throw ConfigError("scenario '" + name + "': no paths");
    if (!(cadence_s > 0.0))
        throw ConfigError("scenario '" + name + "': cadence_s must be positive");
}

MpcParamSet scenario_at(const Scenario &s, int t, const SystemConfig &cfg, const QuantizerSpec &q)
{
    MpcParamSet theta;
    theta.t_index = t;
    const double tt = static_cast<double>(t);
    for (const PathLaw &p : s.paths)
    {
        Mpc m{p.tau(tt) * cfg.sample_period(), std::max(0.0, p.alpha(tt)), wrap_phase(p.phi(tt))};
        if (s.on_lattice)
            m = Mpc{q.delay(m.tau), q.amplitude(m.alpha), q.phase(m.phi)};
        theta.mpcs.push_back(m);
    }
    return theta;
}

Scenario scenario_from_json(const json &j)
{
    Scenario s;
    try
    {
        s.name = j.value("name", std::string("scenario"));
        s.cadence_s = j.value("cadence_s", 2e-3);
        s.seed = j.value("seed", std::uint64_t{1});
        s.on_lattice = j.value("on_lattice", false);
        for (const json &p : j.at("paths"))
        {
            PathLaw law;
            law.tau = law_from_json(p.at("tau"), "tau");
            law.alpha = law_from_json(p.at("alpha"), "alpha");
            law.phi = law_from_json(p.value("phi", json(0.0)), "phi");
            s.paths.push_back(law);
        }
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    s.validate();
    return s;
}

json to_json(const Scenario &s)
{
    json paths = json::array();
    for (const PathLaw &p : s.paths)
        paths.push_back(json{{"tau", law_to_json(p.tau)}, {"alpha", law_to_json(p.alpha)}, {"phi", law_to_json(p.phi)}});
    return json{{"name", s.name},
                {"cadence_s", s.cadence_s},
                {"seed", s.seed},
                {"on_lattice", s.on_lattice},
                {"units", {{"tau", "T_s"}, {"alpha", "linear"}, {"phi", "rad"}, {"t", "instant index"}}},
                {"paths", paths}};
}

Scenario static_scenario(std::uint64_t seed, const BuiltinOptions &opt)
{
    Scenario s = random_start("static", seed, opt);
    for (PathLaw &p : s.paths)
        p.phi.c1 = 0.0;
    return s;
}

Scenario linear_drift_scenario(std::uint64_t seed, const BuiltinOptions &opt)
{
    Scenario s = random_start("linear-drift", seed, opt);
    for (PathLaw &p : s.paths)
    {
        p.tau.kind = LawKind::linear;
        p.tau.c1 = opt.delay_drift;
        p.alpha.kind = LawKind::linear;
        p.alpha.c1 = opt.amplitude_drift * p.alpha.c0;
        p.phi.kind = LawKind::linear;
    }
    return s;
}

Scenario builtin_scenario(const std::string &name, std::uint64_t seed, const BuiltinOptions &opt)
{
    if (name == "static")
        return static_scenario(seed, opt);
    if (name == "linear-drift")
        return linear_drift_scenario(seed, opt);
    throw UsageError("unknown built-in scenario '" + name + "' (expected static or linear-drift)");
}

} // namespace mpcprof
