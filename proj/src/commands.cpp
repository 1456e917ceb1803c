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

#include "mpcprof/channel_model.hpp"
#include "mpcprof/errors.hpp"
#include "mpcprof/esprit.hpp"
#include "mpcprof/initializer.hpp"
#include "mpcprof/model_order.hpp"
#include "mpcprof/parallel.hpp"
#include "mpcprof/weight_bundle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace mpcprof
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

// Stream offset separating baseline noise from the dataset's own draws.
constexpr std::uint64_t esprit_noise_stream = 0x5ca1ab1e0ddba11ull;

json read_json_file(const fs::path &file)
{
    std::ifstream is(file);
    if (!is)
        throw FormatError("cannot open " + file.string());
    try
    {
        return json::parse(is);
    }
    catch (const json::exception &e)
    {
        throw FormatError(file.string() + ": " + e.what());
    }
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

json header(const char *kind)
{
    return json{{"schema", std::string("mpcprof.") + kind}, {"schema_version", report_schema_version}};
}

void check_workers(const GlobalOptions &g)
{
    if (g.workers == 0)
        throw UsageError("--workers must be at least 1");
}

std::size_t channel_count(const Dataset &ds, std::size_t limit)
{
    return limit == 0 ? ds.entries.size() : std::min(limit, ds.entries.size());
}

// Delays folded beyond the grid are clamped so reconstruction stays defined.
void clamp_delays(MpcParamSet &theta, const SystemConfig &cfg)
{
    const double tau_max = std::nextafter(cfg.max_delay(), 0.0);
    for (Mpc &p : theta.mpcs)
        p.tau = std::clamp(p.tau, 0.0, tau_max);
}

WeightBundle require_weights(const std::optional<fs::path> &weights, const std::string &method)
{
    if (!weights)
        throw UsageError("method " + method +
                         " needs a weight bundle (--weights); use the peak-picking methods for the weight-free path");
    return load_weight_bundle(*weights);
}

} // namespace

// ---- shared helpers -----------------------------------------------------

RunContext::RunContext(const GlobalOptions &g)
{
    schedule_ = SearchSchedule::preset(g.schedule_preset, cfg_);
    if (g.config)
        load_config(*g.config, cfg_, schedule_, g.schedule_preset);
    cfg_.validate();
    q_ = QuantizerSpec::defaults(cfg_);
    schedule_.validate(q_);
    bank_ = std::make_shared<SincBank>(cfg_);
}

RunContext::RunContext(const SystemConfig &cfg, const SearchSchedule &schedule)
    : cfg_(cfg), q_(QuantizerSpec::defaults(cfg)), schedule_(schedule)
{
    cfg_.validate();
    schedule_.validate(q_);
    bank_ = std::make_shared<SincBank>(cfg_);
}

void load_config(const fs::path &file, SystemConfig &cfg, SearchSchedule &schedule, const std::string &default_preset)
{
    const json j = read_json_file(file);
    if (!j.is_object())
        throw ConfigError(file.string() + ": expected a JSON object");
    cfg = system_config_from_json(j.contains("system") ? j.at("system") : j);
    schedule = SearchSchedule::preset(default_preset, cfg);
    if (!j.contains("schedule"))
        return;
    const json &s = j.at("schedule");
    try
    {
        if (s.contains("preset"))
            schedule = SearchSchedule::preset(s.at("preset").get<std::string>(), cfg);
        schedule.max_iterations_per_level = s.value("max_iterations_per_level", schedule.max_iterations_per_level);
        schedule.convergence_tol = s.value("convergence_tol", schedule.convergence_tol);
        schedule.tracking_radius = s.value("tracking_radius", schedule.tracking_radius);
        schedule.w_start = s.value("w_start", schedule.w_start);
        schedule.w_stop = s.value("w_stop", schedule.w_stop);
        schedule.track_lost_db = s.value("track_lost_db", schedule.track_lost_db);
    }
    catch (const json::exception &e)
    {
        throw ConfigError(file.string() + ": schedule: " + e.what());
    }
}

fs::path write_output(const GlobalOptions &g, const std::string &name, const std::string &content)
{
    fs::create_directories(g.out_dir);
    const fs::path file = g.out_dir / name;
    if (fs::exists(file) && !g.force)
        throw UsageError("refusing to overwrite " + file.string() + " (use --force)");
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os)
        throw FormatError("cannot open " + file.string());
    os << content;
    if (!os)
        throw FormatError("cannot write " + file.string());
    return file;
}

json environment_json()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
#ifdef NDEBUG
    const char *build = "release";
#else
    const char *build = "debug";
#endif
    return json{{"compiler", __VERSION__},
                {"build", build},
                {"hardware_threads", std::thread::hardware_concurrency()},
                {"timestamp_utc", ts.str()}};
}

ProfiledCir observe_truth(const MpcParamSet &theta, const SystemConfig &cfg)
{
    ProfiledCir p = profile(sample_cir(theta, cfg));
    p.samples.resize(static_cast<std::size_t>(cfg.obs_window_w));
    return p;
}

double recomputed_loss_db(const MpcParamSet &theta_hat, const ProfiledCir &target, const RunContext &rc)
{
    const ProfiledCir recon = reconstruct(theta_hat, rc.cfg(), rc.quantizer(), rc.bank(), target.size());
    return loss_to_db(profiling_loss(target, recon));
}

Eigen::VectorXcd esprit_observation(const Dataset &ds, std::size_t index)
{
    const DatasetEntry &e = ds.entries.at(index);
    Eigen::VectorXcd h = synth_freq_response(e.theta, ds.cfg);
    if (ds.spec.snr_db)
    {
        const double power = h.cwiseAbs2().mean();
        auto rng = channel_rng(ds.spec.rng_seed ^ esprit_noise_stream, index);
        std::normal_distribution<double> nd(0.0, std::sqrt(power * std::pow(10.0, -*ds.spec.snr_db / 10.0) / 2.0));
        for (Eigen::Index m = 0; m < h.size(); ++m)
            h(m) += cdouble{nd(rng), nd(rng)};
    }
    return h;
}

std::vector<CdfRow> empirical_cdf(std::vector<double> losses_db)
{
    std::sort(losses_db.begin(), losses_db.end());
    std::vector<CdfRow> out(losses_db.size());
    for (std::size_t k = 0; k < losses_db.size(); ++k)
        out[k] = {losses_db[k], static_cast<double>(k + 1) / static_cast<double>(losses_db.size())};
    return out;
}

// ---- generate ------------------------------------------------------------

fs::path cmd_generate(const GlobalOptions &g, const GenerateOptions &o)
{
    check_workers(g);
    const RunContext rc(g);
    Dataset ds;
    ds.cfg = rc.cfg();
    if (o.spec_file)
    {
        const json j = read_json_file(*o.spec_file);
        ds.spec = dataset_spec_from_json(j.contains("dataset_spec") ? j.at("dataset_spec") : j);
    }
    if (o.n_channels)
        ds.spec.n_channels = *o.n_channels;
    if (g.seed)
        ds.spec.rng_seed = *g.seed;
    ds.spec.validate(ds.cfg);
    ds.entries = generate_dataset(ds.spec, ds.cfg, g.workers);
    write_dataset(g.out_dir, o.stem, ds, g.force);
    return g.out_dir / (o.stem + ".json");
}

// ---- estimate / esprit ---------------------------------------------------

std::vector<ChannelResult> run_estimate(const Dataset &ds, const EstimateOptions &o, const RunContext &rc,
                                        unsigned workers)
{
    static const std::vector<std::string> methods{"peak",          "nn",          "profiling", "nn-profiling",
                                                  "peak-tracking", "nn-tracking", "esprit"};
    if (std::find(methods.begin(), methods.end(), o.method) == methods.end())
        throw UsageError("unknown method '" + o.method +
                         "' (expected peak, nn, profiling, nn-profiling, peak-tracking, nn-tracking or esprit)");
    const bool uses_nn = o.method.rfind("nn", 0) == 0;
    std::optional<WeightBundle> bundle;
    if (uses_nn)
        bundle = require_weights(o.weights, o.method);

    const SystemConfig &cfg = rc.cfg();
    const EstimatorContext ectx = rc.estimator();
    const std::size_t n = channel_count(ds, o.limit);
    std::vector<ChannelResult> out(n);
    parallel_for(n, workers, [&](std::size_t k) {
        const DatasetEntry &e = ds.entries[k];
        ChannelResult r;
        r.index = k;
        r.model_order = e.theta.size();
        ProfiledCir target = e.profile;
        target.t_index = 0;
        const auto t0 = std::chrono::steady_clock::now();

        MpcParamSet seed;
        if (o.method == "esprit")
        {
            EspritConfig ec = EspritConfig::defaults(cfg, r.model_order);
            ec.use_forward_backward = o.forward_backward;
            const Eigen::VectorXcd h = esprit_observation(ds, k);
            const auto ls = ls_amp_phase(esprit_delays(h, ec, cfg), h, cfg);
            r.theta_hat = ls.theta;
            r.flagged = ls.ill_conditioned;
        }
        else
        {
            if (uses_nn)
                seed = nn_infer(prepare_input(e.cir, cfg), *bundle, cfg);
            else
            {
                PeakPickResult pk = peak_pick_init(target, r.model_order, cfg);
                seed = std::move(pk.theta);
                r.flagged = pk.padded || pk.degenerate;
            }
            const std::string stage = o.method.substr(o.method.find('-') == std::string::npos ? o.method.size()
                                                                                              : o.method.find('-') + 1);
            if (o.method == "profiling" || stage == "profiling")
            {
                const EstimateReport rep =
                    estimate_initial(target, r.model_order, ectx, uses_nn ? std::optional<MpcParamSet>(seed) : std::nullopt);
                r.theta_hat = rep.theta_hat;
                r.flagged = r.flagged || rep.seed_padded ||
                            std::any_of(rep.degenerate.begin(), rep.degenerate.end(), [](bool d) { return d; });
            }
            else if (stage == "tracking")
                r.theta_hat = track(seed, target, ectx).theta_hat;
            else
                r.theta_hat = seed;
        }
        r.elapsed_s = seconds_since(t0);
        clamp_delays(r.theta_hat, cfg);
        r.loss_db = recomputed_loss_db(r.theta_hat, target, rc);
        r.loss_clean_db = recomputed_loss_db(r.theta_hat, observe_truth(e.theta, cfg), rc);
        out[k] = std::move(r);
    });
    return out;
}

namespace
{

void write_estimate_outputs(const GlobalOptions &g, const EstimateOptions &o, const Dataset &ds,
                            const std::vector<ChannelResult> &rows)
{
    json channels = json::array();
    std::vector<double> losses;
    for (const auto &r : rows)
    {
        losses.push_back(r.loss_db);
        channels.push_back(json{{"index", r.index},
                                {"model_order", r.model_order},
                                {"loss_db", r.loss_db},
                                {"loss_clean_db", r.loss_clean_db},
                                {"elapsed_s", r.elapsed_s},
                                {"flagged", r.flagged},
                                {"theta_hat", to_json(r.theta_hat)}});
    }
    json j = header("estimate");
    j["method"] = o.method;
    j["dataset"] = o.dataset.string();
    j["dataset_seed"] = ds.spec.rng_seed;
    j["n_channels"] = rows.size();
    j["median_loss_db"] = median(losses);
    j["model_order_source"] = "dataset ground truth";
    j["environment"] = environment_json();
    j["channels"] = channels;
    write_output(g, o.stem + "_results.json", dump(j));

    std::ostringstream csv;
    csv << "loss_db,empirical_probability\n" << std::setprecision(10);
    for (const auto &row : empirical_cdf(losses))
        csv << row.loss_db << ',' << row.probability << '\n';
    write_output(g, o.stem + "_cdf.csv", csv.str());
}

} // namespace

std::vector<ChannelResult> cmd_estimate(const GlobalOptions &g, const EstimateOptions &o)
{
    check_workers(g);
    const Dataset ds = read_dataset(o.dataset);
    const RunContext base(g);
    const RunContext rc(ds.cfg, base.schedule());
    auto rows = run_estimate(ds, o, rc, g.workers);
    write_estimate_outputs(g, o, ds, rows);
    return rows;
}

std::vector<ChannelResult> cmd_esprit(const GlobalOptions &g, EstimateOptions o)
{
    o.method = "esprit";
    if (o.stem == "estimate")
        o.stem = "esprit";
    return cmd_estimate(g, o);
}

// ---- track / predict -----------------------------------------------------

Scenario resolve_scenario(const GlobalOptions &g, const ScenarioSource &s)
{
    Scenario sc;
    if (s.file)
        sc = scenario_from_json(read_json_file(*s.file));
    else
        sc = builtin_scenario(s.builtin, g.seed.value_or(1), s.builtin_options);
    if (g.seed && s.file)
        sc.seed = *g.seed;
    sc.validate();
    return sc;
}

std::vector<TrackStep> run_tracking(const Scenario &s, int t_first, int t_last, const RunContext &rc)
{
    if (t_last < t_first)
        throw UsageError("tracking range is empty");
    const EstimatorContext ectx = rc.estimator();
    std::vector<TrackStep> steps;
    MpcParamSet prev;
    for (int t = t_first; t <= t_last; ++t)
    {
        const ProfiledCir target = [&] {
            ProfiledCir p = observe_truth(scenario_at(s, t, rc.cfg(), rc.quantizer()), rc.cfg());
            p.t_index = t;
            return p;
        }();
        const EstimateReport rep =
            t == t_first ? estimate_initial(target, s.paths.size(), ectx) : track(prev, target, ectx);
        TrackStep st;
        st.t_index = t;
        st.theta_hat = rep.theta_hat;
        st.loss_db = recomputed_loss_db(rep.theta_hat, target, rc);
        st.elapsed_s = rep.elapsed_s;
        st.track_lost = rep.track_lost;
        prev = rep.theta_hat;
        steps.push_back(std::move(st));
    }
    return steps;
}

std::vector<TrackStep> cmd_track(const GlobalOptions &g, const TrackOptions &o)
{
    const RunContext rc(g);
    const Scenario s = resolve_scenario(g, o.scenario);
    const auto steps = run_tracking(s, 0, static_cast<int>(o.steps), rc);

    json rows = json::array();
    std::ostringstream csv;
    csv << "t_index,t_ms,loss_db,elapsed_s,track_lost\n" << std::setprecision(10);
    for (const auto &st : steps)
    {
        rows.push_back(json{{"t_index", st.t_index},
                            {"loss_db", st.loss_db},
                            {"elapsed_s", st.elapsed_s},
                            {"track_lost", st.track_lost},
                            {"theta_hat", to_json(st.theta_hat)}});
        csv << st.t_index << ',' << st.t_index * s.cadence_s * 1e3 << ',' << st.loss_db << ',' << st.elapsed_s << ','
            << (st.track_lost ? 1 : 0) << '\n';
    }
    json j = header("track");
    j["scenario"] = to_json(s);
    j["steps"] = rows;
    j["environment"] = environment_json();
    write_output(g, o.stem + "_report.json", dump(j));
    write_output(g, o.stem + "_steps.csv", csv.str());
    return steps;
}

PredictRun run_prediction(const Scenario &s, const PredictOptions &o, const RunContext &rc)
{
    if (o.observe_start < 0 || o.observe_stop - o.observe_start + 1 < 2)
        throw UsageError("observation range must cover at least 2 instants");
    if (o.source != "tracked" && o.source != "truth")
        throw UsageError("unknown prediction source '" + o.source + "' (expected tracked or truth)");
    PredictRun run;
    if (o.source == "tracked")
    {
        for (auto &st : run_tracking(s, o.observe_start, o.observe_stop, rc))
            run.observed.push_back(std::move(st.theta_hat));
    }
    else
    {
        for (int t = o.observe_start; t <= o.observe_stop; ++t)
            run.observed.push_back(scenario_at(s, t, rc.cfg(), rc.quantizer()));
    }
    const ParameterTrackSet tracks = fit_tracks(run.observed, Association::tracked_identity);

    std::vector<ProfiledCir> truth, predicted;
    for (std::size_t h = 1; h <= o.horizon; ++h)
    {
        const int t = o.observe_stop + static_cast<int>(h);
        ProfiledCir tp = observe_truth(scenario_at(s, t, rc.cfg(), rc.quantizer()), rc.cfg());
        tp.t_index = t;
        truth.push_back(std::move(tp));
        predicted.push_back(predict_csi(tracks, t, rc.cfg(), rc.quantizer(), rc.bank()));
    }
    run.horizon = evaluate_horizon(truth, predicted);
    return run;
}

PredictRun cmd_predict(const GlobalOptions &g, const PredictOptions &o)
{
    const RunContext rc(g);
    const Scenario s = resolve_scenario(g, o.scenario);
    PredictRun run = run_prediction(s, o, rc);

    std::ostringstream csv;
    write_horizon_csv(csv, run.horizon, s.cadence_s);
    write_output(g, o.stem + "_horizon.csv", csv.str());

    std::vector<double> losses;
    std::size_t violations = 0;
    for (const auto &r : run.horizon)
    {
        losses.push_back(r.loss_db);
        violations += r.model_violation ? 1 : 0;
    }
    json j = header("predict");
    j["scenario"] = to_json(s);
    j["source"] = o.source;
    j["observed"] = {{"t_first", o.observe_start}, {"t_last", o.observe_stop}};
    j["horizon"] = o.horizon;
    j["cadence_s"] = s.cadence_s;
    j["median_loss_db"] = median(losses);
    j["worst_loss_db"] = losses.empty() ? 0.0 : *std::max_element(losses.begin(), losses.end());
    j["model_violations"] = violations;
    write_output(g, o.stem + "_summary.json", dump(j));
    return run;
}

// ---- bench ---------------------------------------------------------------

const BenchRow *BenchReport::find(const std::string &method) const
{
    for (const auto &r : rows)
        if (r.method == method)
            return &r;
    return nullptr;
}

BenchReport run_bench(const Dataset &ds, const BenchOptions &o, const RunContext &rc)
{
    if (o.trials < 3)
        throw UsageError("bench needs at least 3 trials (timing noise)");
    if (ds.entries.empty())
        throw FormatError("bench: empty dataset");
    std::optional<WeightBundle> bundle;
    if (o.weights)
        bundle = load_weight_bundle(*o.weights);

    const SystemConfig &cfg = rc.cfg();
    const EstimatorContext ectx = rc.estimator();
    const double drift = 0.1 * cfg.sample_period();

    using Method = std::function<MpcParamSet(const DatasetEntry &, std::size_t)>;
    std::vector<std::pair<std::string, Method>> methods;
    methods.emplace_back("peak_start_inference", [&](const DatasetEntry &e, std::size_t) {
        return peak_pick_init(e.profile, e.theta.size(), cfg).theta;
    });
    if (bundle)
        methods.emplace_back("nn_start_inference", [&](const DatasetEntry &e, std::size_t) {
            return nn_infer(prepare_input(e.cir, cfg), *bundle, cfg);
        });
    methods.emplace_back("profiling_tracking", [&](const DatasetEntry &e, std::size_t) {
        // The previous instant of a drift of 0.1 T_s per step.
        MpcParamSet prev = e.theta;
        for (Mpc &p : prev.mpcs)
            p.tau = std::max(0.0, p.tau - drift);
        return track(prev, e.profile, ectx).theta_hat;
    });
    methods.emplace_back("profiling_start", [&](const DatasetEntry &e, std::size_t) {
        return estimate_initial(e.profile, e.theta.size(), ectx).theta_hat;
    });
    methods.emplace_back("unitary_esprit", [&](const DatasetEntry &e, std::size_t k) {
        const Eigen::VectorXcd h = esprit_observation(ds, k);
        MpcParamSet th = ls_amp_phase(esprit_delays(h, EspritConfig::defaults(cfg, e.theta.size()), cfg), h, cfg).theta;
        clamp_delays(th, cfg);
        return th;
    });

    BenchReport rep;
    for (auto &[name, fn] : methods)
    {
        BenchRow row;
        row.method = name;
        for (std::size_t w = 0; w < o.warmup; ++w)
            (void)fn(ds.entries[w % ds.entries.size()], w % ds.entries.size());
        for (std::size_t t = 0; t < o.trials; ++t)
        {
            const std::size_t k = t % ds.entries.size();
            const auto t0 = std::chrono::steady_clock::now();
            MpcParamSet th = fn(ds.entries[k], k);
            row.elapsed_s.push_back(seconds_since(t0));
            clamp_delays(th, cfg);
            row.loss_db.push_back(recomputed_loss_db(th, ds.entries[k].profile, rc));
        }
        row.n_trials = o.trials;
        row.median_elapsed_s = median(row.elapsed_s);
        row.median_loss_db = median(row.loss_db);
        rep.rows.push_back(std::move(row));
    }
    const BenchRow *init = rep.find("peak_start_inference");
    if (const BenchRow *nn = rep.find("nn_start_inference"))
        init = nn->median_elapsed_s < init->median_elapsed_s ? nn : init;
    const BenchRow *trk = rep.find("profiling_tracking");
    const BenchRow *start = rep.find("profiling_start");
    rep.ordering_holds =
        init->median_elapsed_s < trk->median_elapsed_s && trk->median_elapsed_s < start->median_elapsed_s;
    return rep;
}

BenchReport cmd_bench(const GlobalOptions &g, const BenchOptions &o)
{
    const Dataset ds = read_dataset(o.dataset);
    const RunContext base(g);
    const RunContext rc(ds.cfg, base.schedule());
    const BenchReport rep = run_bench(ds, o, rc);

    json rows = json::array();
    for (const auto &r : rep.rows)
        rows.push_back(json{{"method", r.method},
                            {"median_elapsed_s", r.median_elapsed_s},
                            {"median_loss_db", r.median_loss_db},
                            {"n_trials", r.n_trials},
                            {"elapsed_s", r.elapsed_s},
                            {"loss_db", r.loss_db}});
    json j = header("bench");
    j["dataset"] = o.dataset.string();
    j["warmup_runs"] = o.warmup;
    j["timing"] = "median over trials, steady clock, warm-up runs discarded";
    j["rows"] = rows;
    j["latency_ordering"] = {{"claim", "init inference < one tracking step < full profiling start"},
                             {"holds", rep.ordering_holds}};
    j["environment"] = environment_json();
    write_output(g, o.stem + "_report.json", dump(j));
    return rep;
}

// ---- model-order ---------------------------------------------------------

ModelOrderRun cmd_model_order(const GlobalOptions &g, const ModelOrderOptions &o)
{
    check_workers(g);
    const RunContext rc(g);
    ModelOrderCaseSpec spec;
    spec.paths.n_channels = o.n_channels;
    spec.paths.model_order_min = o.min_order;
    spec.paths.model_order_max = o.max_order;
    spec.paths.min_separation = 1.0;
    spec.paths.amplitude_spread_db = 10.0;
    spec.paths.snr_db = o.snr_db;
    spec.paths.rng_seed = g.seed.value_or(1);
    spec.paths.validate(rc.cfg());
    spec.n_instants = o.n_instants;
    std::optional<WeightBundle> bundle;
    if (o.weights)
        bundle = load_weight_bundle(*o.weights);

    ModelOrderRun run;
    run.truth.resize(o.n_channels);
    run.heuristic.resize(o.n_channels);
    if (bundle)
        run.nn.resize(o.n_channels);
    std::vector<std::vector<double>> features(o.n_channels);
    parallel_for(o.n_channels, g.workers, [&](std::size_t k) {
        const ModelOrderCase c = synth_model_order_case(spec, rc.cfg(), k);
        const ModeSingularValues sv = hosvd_singular_values(c.tensor);
        run.truth[k] = c.true_order;
        run.heuristic[k] = select_model_order(sv, o.floor_db, o.modes);
        features[k] = model_order_features(sv, o.modes);
        if (bundle)
            run.nn[k] = nn_model_order(sv, *bundle, o.modes);
    });
    std::size_t hits = 0;
    const std::size_t n_classes = static_cast<std::size_t>(o.max_order);
    std::vector<std::vector<std::size_t>> confusion(n_classes, std::vector<std::size_t>(n_classes + 1, 0));
    for (std::size_t k = 0; k < o.n_channels; ++k)
    {
        hits += run.truth[k] == run.heuristic[k] ? 1 : 0;
        confusion[run.truth[k] - 1][std::min(run.heuristic[k], n_classes + 1) - 1] += 1;
    }
    run.accuracy = o.n_channels ? static_cast<double>(hits) / static_cast<double>(o.n_channels) : 0.0;

    json j = header("model_order");
    j["n_channels"] = o.n_channels;
    j["floor_db"] = o.floor_db;
    j["snr_db"] = o.snr_db ? json(*o.snr_db) : json(nullptr);
    j["seed"] = spec.paths.rng_seed;
    j["modes"] = o.modes;
    j["accuracy"] = run.accuracy;
    j["confusion"] = confusion;
    j["confusion_layout"] = "rows: true order 1..max; columns: selected order 1..max+1 (last column: above max)";
    if (bundle)
    {
        std::size_t agree = 0;
        for (std::size_t k = 0; k < o.n_channels; ++k)
            agree += run.nn[k] == run.heuristic[k] ? 1 : 0;
        j["nn_agreement"] = o.n_channels ? static_cast<double>(agree) / static_cast<double>(o.n_channels) : 0.0;
    }
    write_output(g, o.stem + "_results.json", dump(j));
    if (o.features_csv)
    {
        std::ostringstream csv;
        const std::size_t n_modes = features.empty() ? 0 : features.front().size() / model_order_features_per_mode;
        write_features_csv_header(csv, n_modes);
        for (std::size_t k = 0; k < o.n_channels; ++k)
            write_features_csv_row(csv, features[k], run.truth[k]);
        write_output(g, o.stem + "_features.csv", csv.str());
    }
    return run;
}

} // namespace mpcprof
