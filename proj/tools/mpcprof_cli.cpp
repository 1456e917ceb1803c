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

#include "mpcprof/commands.hpp"
#include "mpcprof/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace mpcprof;

namespace
{

void add_scenario_flags(CLI::App *cmd, ScenarioSource &s)
{
    cmd->add_option("--scenario", s.file, "Scenario JSON with per-parameter evolution laws");
    cmd->add_option("--builtin", s.builtin, "Built-in scenario when no file is given")
        ->check(CLI::IsMember({"static", "linear-drift"}));
    cmd->add_option("--paths", s.builtin_options.n_paths, "Paths of the built-in scenario")->check(CLI::PositiveNumber);
    cmd->add_option("--delay-drift", s.builtin_options.delay_drift, "Built-in delay drift per instant (T_s)");
    cmd->add_flag("!--off-lattice", s.builtin_options.on_lattice,
                  "Built-in parameters leave the quantizer lattice");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mpcprof: multipath component profiling, tracking and prediction"};
    app.require_subcommand(1);

    GlobalOptions g;
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config, "JSON system/schedule configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "RNG seed override");
    app.add_option("--workers", g.workers, "Worker threads for per-channel work")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "Directory for outputs");
    app.add_flag("--force", g.force, "Overwrite existing outputs");
    app.add_option("--schedule", g.schedule_preset, "Search schedule preset")
        ->check(CLI::IsMember({"standard", "fast"}));

    GenerateOptions gen;
    auto *c_gen = app.add_subcommand("generate", "Generate a synthetic channel dataset");
    c_gen->add_option("--spec", gen.spec_file, "Dataset spec JSON")->check(CLI::ExistingFile);
    c_gen->add_option("--stem", gen.stem, "Output file stem");
    c_gen->add_option("--n-channels", gen.n_channels, "Override the channel count");

    EstimateOptions est;
    auto *c_est = app.add_subcommand("estimate", "Estimate MPC parameters per channel and emit a loss CDF");
    c_est->add_option("--dataset", est.dataset, "Dataset metadata JSON")->required()->check(CLI::ExistingFile);
    c_est->add_option("--method", est.method,
                      "peak | nn | profiling | nn-profiling | peak-tracking | nn-tracking | esprit");
    c_est->add_option("--weights", est.weights, "Weight bundle for the nn methods")->check(CLI::ExistingFile);
    c_est->add_option("--limit", est.limit, "Use only the first N channels (0: all)");
    c_est->add_option("--stem", est.stem, "Output file stem");

    EstimateOptions esp;
    esp.stem = "esprit";
    auto *c_esp = app.add_subcommand("esprit", "Unitary ESPRIT delays with least-squares amplitudes and phases");
    c_esp->add_option("--dataset", esp.dataset, "Dataset metadata JSON")->required()->check(CLI::ExistingFile);
    c_esp->add_option("--limit", esp.limit, "Use only the first N channels (0: all)");
    c_esp->add_flag("!--no-fb", esp.forward_backward, "Disable forward-backward averaging");
    c_esp->add_option("--stem", esp.stem, "Output file stem");

    TrackOptions trk;
    auto *c_trk = app.add_subcommand("track", "Start estimate followed by tracking steps on a scenario");
    add_scenario_flags(c_trk, trk.scenario);
    c_trk->add_option("--steps", trk.steps, "Tracking steps after the start instant");
    c_trk->add_option("--stem", trk.stem, "Output file stem");

    PredictOptions prd;
    auto *c_prd = app.add_subcommand("predict", "Observe, fit parameter splines and predict a horizon");
    add_scenario_flags(c_prd, prd.scenario);
    c_prd->add_option("--observe-start", prd.observe_start, "First observed instant");
    c_prd->add_option("--observe-stop", prd.observe_stop, "Last observed instant");
    c_prd->add_option("--horizon", prd.horizon, "Predicted instants after the last observation");
    c_prd->add_option("--source", prd.source, "Observed parameters: tracked estimates or scenario truth")
        ->check(CLI::IsMember({"tracked", "truth"}));
    c_prd->add_option("--stem", prd.stem, "Output file stem");

    BenchOptions bch;
    auto *c_bch = app.add_subcommand("bench", "Latency and accuracy per method");
    c_bch->add_option("--dataset", bch.dataset, "Dataset metadata JSON")->required()->check(CLI::ExistingFile);
    c_bch->add_option("--trials", bch.trials, "Timed trials per method (>= 3)");
    c_bch->add_option("--weights", bch.weights, "Weight bundle enabling nn_start_inference")
        ->check(CLI::ExistingFile);
    c_bch->add_option("--stem", bch.stem, "Output file stem");

    ModelOrderOptions mo;
    std::optional<double> mo_snr = mo.snr_db;
    bool mo_noiseless = false;
    auto *c_mo = app.add_subcommand("model-order", "HOSVD model-order selection on synthetic channel tensors");
    c_mo->add_option("--n-channels", mo.n_channels, "Synthetic channels");
    c_mo->add_option("--min-order", mo.min_order, "Smallest drawn model order");
    c_mo->add_option("--max-order", mo.max_order, "Largest drawn model order");
    c_mo->add_option("--floor-db", mo.floor_db, "Singular-value floor relative to the largest (dB)");
    c_mo->add_option("--snr-db", mo_snr, "Tensor SNR");
    c_mo->add_flag("--noiseless", mo_noiseless, "No tensor noise");
    c_mo->add_option("--instants", mo.n_instants, "Time instants per tensor");
    c_mo->add_option("--modes", mo.modes, "Modes used by the decision (0 antenna, 1 frequency, 2 time)");
    c_mo->add_option("--weights", mo.weights, "Dense classifier bundle")->check(CLI::ExistingFile);
    c_mo->add_option("--stem", mo.stem, "Output file stem");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    if (config)
        g.config = *config;
    g.seed = seed;

    try
    {
        if (c_gen->parsed())
            std::cout << cmd_generate(g, gen).string() << '\n';
        else if (c_est->parsed())
        {
            const auto rows = cmd_estimate(g, est);
            std::cout << rows.size() << " channels estimated\n";
        }
        else if (c_esp->parsed())
        {
            const auto rows = cmd_esprit(g, esp);
            std::cout << rows.size() << " channels estimated\n";
        }
        else if (c_trk->parsed())
        {
            for (const auto &st : cmd_track(g, trk))
                std::printf("t=%d loss_db=%.2f elapsed_s=%.4f%s\n", st.t_index, st.loss_db, st.elapsed_s,
                            st.track_lost ? " track_lost" : "");
        }
        else if (c_prd->parsed())
        {
            const auto run = cmd_predict(g, prd);
            std::cout << run.horizon.size() << " horizon rows\n";
        }
        else if (c_bch->parsed())
        {
            const auto rep = cmd_bench(g, bch);
            for (const auto &r : rep.rows)
                std::printf("%-22s median %.6f s  loss %.2f dB  (%zu trials)\n", r.method.c_str(), r.median_elapsed_s,
                            r.median_loss_db, r.n_trials);
            std::printf("latency ordering (init < tracking < start): %s\n", rep.ordering_holds ? "holds" : "violated");
        }
        else if (c_mo->parsed())
        {
            mo.snr_db = mo_noiseless ? std::nullopt : mo_snr;
            const auto run = cmd_model_order(g, mo);
            std::printf("accuracy %.4f over %zu channels\n", run.accuracy, run.truth.size());
        }
    }
    catch (const Error &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data);
    }
    return 0;
}
