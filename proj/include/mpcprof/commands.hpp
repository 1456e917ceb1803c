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

#include "mpcprof/dataset_io.hpp"
#include "mpcprof/estimator.hpp"
#include "mpcprof/predictor.hpp"
#include "mpcprof/profiler.hpp"
#include "mpcprof/scenario.hpp"
#include "mpcprof/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mpcprof
{

inline constexpr int report_schema_version = 1;

/// Flags shared by every subcommand.
struct GlobalOptions
{
    std::optional<std::filesystem::path> config; // JSON: {"system": {...}, "schedule": {...}}
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::filesystem::path out_dir = ".";
    bool force = false;
    std::string schedule_preset = "standard";
};

/// System configuration, quantizer, schedule and sinc bank of one run.
class RunContext
{
public:
    explicit RunContext(const GlobalOptions &g);
    RunContext(const SystemConfig &cfg, const SearchSchedule &schedule);

    const SystemConfig &cfg() const { return cfg_; }
    const QuantizerSpec &quantizer() const { return q_; }
    const SearchSchedule &schedule() const { return schedule_; }
    const SincBank &bank() const { return *bank_; }
    EstimatorContext estimator() const { return {cfg_, q_, *bank_, schedule_}; }

private:
    SystemConfig cfg_;
    QuantizerSpec q_;
    SearchSchedule schedule_;
    std::shared_ptr<SincBank> bank_;
};

// Loads a config file: system keys either under "system" or at top level,
// optional "schedule" section with "preset" and numeric overrides.
void load_config(const std::filesystem::path &file, SystemConfig &cfg, SearchSchedule &schedule,
                 const std::string &default_preset);

// Writes text to out_dir / name; refuses to overwrite without force.
std::filesystem::path write_output(const GlobalOptions &g, const std::string &name, const std::string &content);

nlohmann::json environment_json();

// Profile of the true parameters over the observation window.
ProfiledCir observe_truth(const MpcParamSet &theta, const SystemConfig &cfg);

// Loss of theta_hat against target, recomputed from the parameters.
double recomputed_loss_db(const MpcParamSet &theta_hat, const ProfiledCir &target, const RunContext &rc);

// Frequency samples for the subspace baseline: the noiseless response of the
// true parameters, plus white noise at the dataset SNR when one is set.
Eigen::VectorXcd esprit_observation(const Dataset &ds, std::size_t index);

// ---- generate ------------------------------------------------------------

struct GenerateOptions
{
    std::optional<std::filesystem::path> spec_file;
    std::string stem = "dataset";
    std::optional<std::size_t> n_channels;
};

std::filesystem::path cmd_generate(const GlobalOptions &g, const GenerateOptions &o);

// ---- estimate / esprit ---------------------------------------------------

struct EstimateOptions
{
    std::filesystem::path dataset;
    // peak | nn | profiling | nn-profiling | peak-tracking | nn-tracking | esprit
    std::string method = "profiling";
    std::optional<std::filesystem::path> weights;
    std::size_t limit = 0; // 0: every channel
    bool forward_backward = true;
    std::string stem = "estimate";
};

struct ChannelResult
{
    std::size_t index = 0;
    std::size_t model_order = 0;
    MpcParamSet theta_hat;
    double loss_db = 0.0;       // against the observed profile
    double loss_clean_db = 0.0; // against the noiseless profile of the truth
    double elapsed_s = 0.0;
    bool flagged = false;       // padded seed, degenerate or ill-conditioned
};

struct CdfRow
{
    double loss_db = 0.0;
    double probability = 0.0;
};

std::vector<CdfRow> empirical_cdf(std::vector<double> losses_db);

std::vector<ChannelResult> run_estimate(const Dataset &ds, const EstimateOptions &o, const RunContext &rc,
                                        unsigned workers);

std::vector<ChannelResult> cmd_estimate(const GlobalOptions &g, const EstimateOptions &o);

std::vector<ChannelResult> cmd_esprit(const GlobalOptions &g, EstimateOptions o);

// ---- track / predict -----------------------------------------------------

struct ScenarioSource
{
    std::optional<std::filesystem::path> file;
    std::string builtin = "linear-drift";
    BuiltinOptions builtin_options;
};

Scenario resolve_scenario(const GlobalOptions &g, const ScenarioSource &s);

struct TrackStep
{
    int t_index = 0;
    MpcParamSet theta_hat;
    double loss_db = 0.0;
    double elapsed_s = 0.0;
    bool track_lost = false;
};

// Full start at t_first, then one tracking step per instant up to t_last.
std::vector<TrackStep> run_tracking(const Scenario &s, int t_first, int t_last, const RunContext &rc);

struct TrackOptions
{
    ScenarioSource scenario;
    std::size_t steps = 10;
    std::string stem = "track";
};

std::vector<TrackStep> cmd_track(const GlobalOptions &g, const TrackOptions &o);

struct PredictOptions
{
    ScenarioSource scenario;
    int observe_start = 10;
    int observe_stop = 30;
    std::size_t horizon = 70;
    std::string source = "tracked"; // tracked | truth
    std::string stem = "predict";
};

struct PredictRun
{
    std::vector<MpcParamSet> observed;
    std::vector<HorizonRow> horizon;
};

PredictRun run_prediction(const Scenario &s, const PredictOptions &o, const RunContext &rc);

PredictRun cmd_predict(const GlobalOptions &g, const PredictOptions &o);

// ---- bench ---------------------------------------------------------------

struct BenchOptions
{
    std::filesystem::path dataset;
    std::size_t trials = 20;
    std::size_t warmup = 2;
    std::optional<std::filesystem::path> weights;
    std::string stem = "bench";
};

struct BenchRow
{
    std::string method;
    double median_elapsed_s = 0.0;
    double median_loss_db = 0.0;
    std::size_t n_trials = 0;
    std::vector<double> elapsed_s;
    std::vector<double> loss_db;
};

struct BenchReport
{
    std::vector<BenchRow> rows;
    bool ordering_holds = false; // init < tracking step < full start

    const BenchRow *find(const std::string &method) const;
};

BenchReport run_bench(const Dataset &ds, const BenchOptions &o, const RunContext &rc);

BenchReport cmd_bench(const GlobalOptions &g, const BenchOptions &o);

// ---- model-order ---------------------------------------------------------

struct ModelOrderOptions
{
    std::size_t n_channels = 1000;
    int min_order = 1;
    int max_order = 4;
    double floor_db = -25.0;
    std::optional<double> snr_db = 20.0;
    std::size_t n_instants = 16;
    std::vector<std::size_t> modes; // empty: every mode
    std::optional<std::filesystem::path> weights;
    bool features_csv = true;
    std::string stem = "model_order";
};

struct ModelOrderRun
{
    std::vector<std::size_t> truth;
    std::vector<std::size_t> heuristic;
    std::vector<std::size_t> nn; // empty without weights
    double accuracy = 0.0;       // heuristic against truth
};

ModelOrderRun cmd_model_order(const GlobalOptions &g, const ModelOrderOptions &o);

} // namespace mpcprof
