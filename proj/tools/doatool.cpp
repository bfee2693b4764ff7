#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "doa/angles.hpp"
#include "doa/csv.hpp"
#include "doa/detection.hpp"
#include "doa/errors.hpp"
#include "doa/estimator.hpp"
#include "doa/field_data.hpp"
#include "doa/io.hpp"
#include "doa/likelihood.hpp"
#include "doa/metrics.hpp"
#include "doa/parallel.hpp"
#include "doa/pattern.hpp"
#include "doa/sim.hpp"
#include "doa/tracker.hpp"

namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GlobalOpts {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out_dir = "out";
    double sigma = 2.0;
    double gamma = -95.0;
    double pc = 1.0;
};

std::filesystem::path out_path(const GlobalOpts& g, const std::string& name) {
    return std::filesystem::path(g.out_dir) / name;
}

void ensure_out_dir(const GlobalOpts& g) {
    std::filesystem::create_directories(g.out_dir);
}

void write_manifest(const GlobalOpts& g, const std::string& subcommand, const json& config,
                    const std::vector<std::string>& argv,
                    const std::vector<std::string>& outputs) {
    json m;
    m["tool"] = "doatool";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["seed"] = g.seed;
    m["argv"] = argv;
    m["config"] = config;
    m["outputs"] = outputs;
    std::ofstream os(out_path(g, "manifest.json"));
    if (!os) throw doa::InvalidInput("cannot write manifest in '" + g.out_dir + "'");
    os << m.dump(2) << '\n';
}

json global_config(const GlobalOpts& g) {
    return json{{"seed", g.seed},   {"threads", g.threads}, {"out_dir", g.out_dir},
                {"sigma", g.sigma}, {"gamma", g.gamma},     {"pc", g.pc}};
}

doa::ArrayConfig load_array(const std::string& pattern_file, const GlobalOpts& g) {
    auto patterns = doa::load_patterns_file(pattern_file);
    doa::ArrayConfig array;
    array.patterns = std::move(patterns);
    array.sigma = g.sigma;
    array.gamma_dbm = g.gamma;
    array.pc.assign(array.patterns.size(), g.pc);
    doa::validate_array(array);
    return array;
}

doa::ArrayConfig synth_array(int n_sensors, int order, const GlobalOpts& g) {
    const doa::SensorPattern base = doa::synth_pattern(0.0, -14.0, -20.0, order);
    doa::ArrayConfig array;
    array.patterns = doa::make_uca(base, n_sensors);
    array.sigma = g.sigma;
    array.gamma_dbm = g.gamma;
    array.pc.assign(array.patterns.size(), g.pc);
    doa::validate_array(array);
    return array;
}

std::vector<std::string> sensor_ids(const doa::ArrayConfig& array) {
    std::vector<std::string> ids;
    ids.reserve(array.size());
    for (const auto& p : array.patterns) ids.push_back(p.sensor_id);
    return ids;
}

doa::CostKind parse_method(const std::string& name) {
    if (name == "proposed") return doa::CostKind::Simplified;
    if (name == "baseline") return doa::CostKind::Baseline;
    if (name == "full") return doa::CostKind::Full;
    throw UsageError("unknown method '" + name + "'");
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string sweep;  // alpha | pc | batch | empty for epoch mode
    std::vector<double> alpha{-70.0, -75.0, -80.0, -85.0};
    std::vector<double> pc_values{0.7, 0.8, 0.9, 1.0};
    std::vector<int> batches{1, 2, 4, 8, 16};
    std::vector<double> psi_true;  // empty: every degree
    int runs = 50;
    int batch = 1;
    int n_sensors = 4;
    int order = 7;
    std::string pattern_file;
    // epoch mode
    int epochs = 0;
    double dt = 1.0;
    double psi0_deg = 45.0;
    double rate_deg_s = 0.0;
    double alpha_true = -70.0;
};

int cmd_simulate(const GlobalOpts& g, const SimulateOpts& o,
                 const std::vector<std::string>& argv) {
    if (o.sweep.empty() && o.epochs == 0)
        throw UsageError("simulate needs --sweep {alpha,pc,batch} or --epochs N");
    if (!o.sweep.empty() && o.epochs > 0)
        throw UsageError("--sweep and --epochs are mutually exclusive");
    if (o.epochs < 0) throw UsageError("--epochs must be positive");

    const doa::ArrayConfig array = o.pattern_file.empty()
                                       ? synth_array(o.n_sensors, o.order, g)
                                       : load_array(o.pattern_file, g);
    ensure_out_dir(g);
    json config = global_config(g);
    config["n_sensors"] = array.size();
    config["pattern_file"] = o.pattern_file;
    std::vector<std::string> outputs;

    {
        std::ofstream os(out_path(g, "patterns.csv"));
        doa::write_patterns_csv(os, array.patterns);
        outputs.push_back("patterns.csv");
    }

    if (!o.sweep.empty()) {
        if (o.runs < 1) throw UsageError("--runs must be positive");
        if (o.batch < 1) throw UsageError("--batch must be positive");
        doa::ScenarioConfig cfg;
        cfg.array = array;
        cfg.psi_true_deg = o.psi_true;
        cfg.alpha_dbm = o.alpha;
        cfg.mc_runs = o.runs;
        cfg.batch = o.batch;
        cfg.seed = g.seed;
        cfg.threads = g.threads;

        doa::SweepResult result;
        if (o.sweep == "alpha") {
            result = doa::run_alpha_sweep(cfg);
        } else if (o.sweep == "pc") {
            result = doa::run_pc_sweep(cfg, o.pc_values);
        } else if (o.sweep == "batch") {
            result = doa::run_batch_sweep(cfg, o.batches);
        } else {
            throw UsageError("unknown sweep '" + o.sweep + "'");
        }
        {
            std::ofstream os(out_path(g, "sweep_records.csv"));
            doa::write_sweep_records_csv(os, result);
            outputs.push_back("sweep_records.csv");
        }
        {
            std::ofstream os(out_path(g, "sweep_aggregates.csv"));
            doa::write_sweep_aggregates_csv(os, result);
            outputs.push_back("sweep_aggregates.csv");
        }
        config["sweep"] = o.sweep;
        config["alpha"] = o.alpha;
        config["pc_values"] = o.pc_values;
        config["batches"] = o.batches;
        config["runs"] = o.runs;
        config["batch"] = o.batch;
    } else {
        if (!(o.dt > 0.0)) throw UsageError("--dt must be positive");
        std::vector<doa::Epoch> epochs(static_cast<std::size_t>(o.epochs));
        std::vector<doa::GroundTruthPoint> truth(static_cast<std::size_t>(o.epochs));
        for (int k = 0; k < o.epochs; ++k) {
            const double t = k * o.dt;
            const double psi_deg = o.psi0_deg + o.rate_deg_s * t;
            const doa::SourceState state{doa::deg2rad(psi_deg), o.alpha_true};
            doa::Rng rng = doa::Rng::stream(g.seed, {0x65706f63ULL,
                                                     static_cast<std::uint64_t>(k)});
            auto& epoch = epochs[static_cast<std::size_t>(k)];
            epoch.t_s = t;
            for (int b = 0; b < o.batch; ++b)
                for (std::size_t m = 0; m < array.size(); ++m)
                    epoch.obs.push_back(
                        doa::simulate_observation(state, array, static_cast<int>(m), rng));
            truth[static_cast<std::size_t>(k)] = {t, psi_deg, 10.0};
        }
        doa::write_observations_file(out_path(g, "observations.csv").string(), epochs,
                                     sensor_ids(array));
        outputs.push_back("observations.csv");
        {
            std::ofstream os(out_path(g, "truth.csv"));
            os << "timestamp_s,bearing_deg,distance_m\n";
            for (const auto& p : truth)
                os << doa::csv::format_double(p.t_s) << ','
                   << doa::csv::format_double(p.bearing_deg) << ','
                   << doa::csv::format_double(p.distance_m) << '\n';
            outputs.push_back("truth.csv");
        }
        config["epochs"] = o.epochs;
        config["dt"] = o.dt;
        config["psi_true"] = o.psi0_deg;
        config["rate_deg_s"] = o.rate_deg_s;
        config["alpha_true"] = o.alpha_true;
        config["batch"] = o.batch;
    }
    write_manifest(g, "simulate", config, argv, outputs);
    return 0;
}

// ------------------------------------------------------------- fit-pattern

struct FitPatternOpts {
    std::string calibration;
    int order = 7;
};

int cmd_fit_pattern(const GlobalOpts& g, const FitPatternOpts& o,
                    const std::vector<std::string>& argv) {
    const auto rows = doa::load_calibration_file(o.calibration);

    std::vector<std::string> order_seen;
    std::map<std::string, std::vector<const doa::CalibrationRow*>> by_sensor;
    for (const auto& r : rows) {
        if (by_sensor.find(r.sensor_id) == by_sensor.end()) order_seen.push_back(r.sensor_id);
        by_sensor[r.sensor_id].push_back(&r);
    }

    std::vector<doa::SensorPattern> fits;
    struct Residual {
        std::string sensor_id;
        double rms_db;
        std::size_t n;
    };
    std::vector<Residual> residuals;
    std::vector<std::string> failures;
    for (const std::string& id : order_seen) {
        const auto& sensor_rows = by_sensor[id];
        std::vector<double> angles, means, variances;
        for (const auto* r : sensor_rows) {
            angles.push_back(doa::deg2rad(r->angle_deg));
            means.push_back(r->mean_dbm);
            variances.push_back(r->var_db2 > 0.0 ? r->var_db2 : 1.0);
        }
        try {
            doa::SensorPattern fit =
                doa::fit_pattern_wls(angles, means, variances, o.order, id);
            double ss = 0.0;
            for (std::size_t i = 0; i < angles.size(); ++i) {
                const double r = means[i] - doa::eval_pattern(fit, angles[i]);
                ss += r * r;
            }
            residuals.push_back({id, std::sqrt(ss / static_cast<double>(angles.size())),
                                 angles.size()});
            fits.push_back(std::move(fit));
        } catch (const doa::RankDeficient& e) {
            failures.push_back(id + ": " + e.what());
        }
    }
    if (!failures.empty()) {
        for (const auto& f : failures) std::cerr << "error: sensor " << f << '\n';
        return 1;
    }

    ensure_out_dir(g);
    doa::write_patterns_file(out_path(g, "patterns.csv").string(), fits);
    {
        std::ofstream os(out_path(g, "residuals.csv"));
        os << "sensor_id,residual_rms_db,n_samples\n";
        for (const auto& r : residuals)
            os << r.sensor_id << ',' << doa::csv::format_double(r.rms_db) << ',' << r.n << '\n';
    }
    json config = global_config(g);
    config["calibration"] = o.calibration;
    config["order"] = o.order;
    write_manifest(g, "fit-pattern", config, argv, {"patterns.csv", "residuals.csv"});
    return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateOpts {
    std::string patterns;
    std::string observations;
    std::string method = "both";
    bool merge_epochs = false;
    long long export_grid_epoch = -1;
};

int cmd_estimate(const GlobalOpts& g, const EstimateOpts& o,
                 const std::vector<std::string>& argv) {
    const doa::ArrayConfig array = load_array(o.patterns, g);
    auto epochs = doa::load_observations_file(o.observations, sensor_ids(array), 1.0);
    if (o.merge_epochs) {
        doa::Epoch merged;
        merged.t_s = 0.0;
        for (const auto& e : epochs)
            merged.obs.insert(merged.obs.end(), e.obs.begin(), e.obs.end());
        epochs = {merged};
    }

    std::vector<doa::CostKind> kinds;
    if (o.method == "both") {
        kinds = {doa::CostKind::Simplified, doa::CostKind::Baseline};
    } else {
        kinds = {parse_method(o.method)};
    }

    const doa::GridSpec grid = doa::default_grid();
    const doa::GainTable gains = doa::precompute_gains(array, grid.psi_rad);

    std::vector<doa::EstimateRow> out_rows(epochs.size() * kinds.size());
    doa::parallel_for(epochs.size(), g.threads, [&](std::size_t i) {
        for (std::size_t v = 0; v < kinds.size(); ++v) {
            doa::EstimateRow row;
            row.epoch_id = std::llround(epochs[i].t_s);
            row.estimate =
                doa::estimate_scan(epochs[i].obs, array, gains, grid.alpha_dbm, kinds[v]);
            out_rows[i * kinds.size() + v] = row;
        }
    });

    ensure_out_dir(g);
    std::vector<std::string> outputs{"estimates.csv"};
    {
        std::ofstream os(out_path(g, "estimates.csv"));
        doa::write_estimates_csv(os, out_rows);
    }
    if (o.export_grid_epoch >= 0) {
        const doa::Epoch* target = nullptr;
        for (const auto& e : epochs)
            if (std::llround(e.t_s) == o.export_grid_epoch) target = &e;
        if (target == nullptr)
            throw doa::InvalidInput("epoch " + std::to_string(o.export_grid_epoch) +
                                    " is not in the observation file");
        for (const doa::CostKind kind : kinds) {
            const auto grid_eval = doa::eval_grid(target->obs, array, grid, kind);
            const auto profile = doa::profile_bearing(grid_eval);
            const std::string tag = doa::cost_kind_name(kind) + "_" +
                                    std::to_string(o.export_grid_epoch);
            {
                std::ofstream os(out_path(g, "grid_" + tag + ".csv"));
                doa::write_grid_csv(os, grid_eval);
                outputs.push_back("grid_" + tag + ".csv");
            }
            {
                std::ofstream os(out_path(g, "profile_" + tag + ".csv"));
                doa::write_profile_csv(os, profile);
                outputs.push_back("profile_" + tag + ".csv");
            }
        }
    }
    json config = global_config(g);
    config["patterns"] = o.patterns;
    config["observations"] = o.observations;
    config["method"] = o.method;
    config["merge_epochs"] = o.merge_epochs;
    config["export_grid_epoch"] = o.export_grid_epoch;
    write_manifest(g, "estimate", config, argv, outputs);
    return 0;
}

// ------------------------------------------------------------------- track

struct TrackOpts {
    std::string patterns;
    std::string observations;
    std::string rssi_log;
    std::string truth;
    std::string method = "proposed";
    double dt = 1.0;
    double window = 1.0;
    double rate = 10.0;
    int particles = 2000;
    double q_deg_s2 = 5.0;
    double resample_threshold = 0.5;
    double clamp = 50.0;
    double init_psi_deg = std::numeric_limits<double>::quiet_NaN();
};

int cmd_track(const GlobalOpts& g, const TrackOpts& o, const std::vector<std::string>& argv) {
    if (o.observations.empty() == o.rssi_log.empty())
        throw UsageError("track needs exactly one of --observations or --rssi-log");
    const doa::ArrayConfig array = load_array(o.patterns, g);

    std::vector<doa::Epoch> epochs;
    if (!o.observations.empty()) {
        if (!(o.dt > 0.0)) throw UsageError("--dt must be positive");
        epochs = doa::load_observations_file(o.observations, sensor_ids(array), o.dt);
    } else {
        const doa::RssiLog log = doa::load_rssi_log(o.rssi_log);
        epochs = doa::batch_observations(log, sensor_ids(array), g.gamma, o.window, o.rate);
    }

    doa::FilterConfig fc;
    fc.n_particles = o.particles;
    const double q_rad = doa::deg2rad(o.q_deg_s2);
    fc.process_noise_q = q_rad * q_rad;
    fc.resample_threshold = o.resample_threshold;
    fc.cost_clamp = o.clamp;
    if (!std::isnan(o.init_psi_deg)) fc.init_psi_rad = doa::deg2rad(o.init_psi_deg);

    const doa::GridSpec grid = doa::default_grid();
    const auto track =
        doa::track_sequence(epochs, array, grid, fc, parse_method(o.method), g.seed);

    ensure_out_dir(g);
    std::vector<std::string> outputs{"track.csv"};
    std::ofstream os(out_path(g, "track.csv"));
    if (o.truth.empty()) {
        doa::write_track_csv(os, track);
    } else {
        const auto truth = doa::load_ground_truth(o.truth);
        os << "timestamp,psi_pf_deg,psi_ml_deg,alpha_hat_dbm,n_missed,track_loss,"
              "err_pf_deg,err_ml_deg\n";
        std::vector<double> pf_deg, truth_deg;
        for (const auto& p : track) {
            const double ref = doa::interp_bearing_deg(truth, p.t_s);
            const double pf = doa::rad2deg(p.psi_pf_rad);
            const double ml = doa::rad2deg(p.psi_ml_rad);
            os << doa::csv::format_double(p.t_s) << ',' << doa::csv::format_double(pf) << ','
               << doa::csv::format_double(ml) << ',' << doa::csv::format_double(p.alpha_ml_dbm)
               << ',' << p.n_missed << ',' << (p.track_loss ? 1 : 0) << ','
               << doa::csv::format_double(doa::circular_error_deg(pf, ref)) << ','
               << doa::csv::format_double(doa::circular_error_deg(ml, ref)) << '\n';
            pf_deg.push_back(pf);
            truth_deg.push_back(ref);
        }
        std::cout << "track rmse_deg=" << doa::rmse_circular_deg(pf_deg, truth_deg)
                  << " epochs=" << track.size() << '\n';
    }
    json config = global_config(g);
    config["patterns"] = o.patterns;
    config["observations"] = o.observations;
    config["rssi_log"] = o.rssi_log;
    config["truth"] = o.truth;
    config["method"] = o.method;
    config["dt"] = o.dt;
    config["window"] = o.window;
    config["rate"] = o.rate;
    config["particles"] = o.particles;
    config["q_deg_s2"] = o.q_deg_s2;
    config["resample_threshold"] = o.resample_threshold;
    config["clamp"] = o.clamp;
    write_manifest(g, "track", config, argv, outputs);
    return 0;
}

// --------------------------------------------------------- sweep-threshold

struct SweepThresholdOpts {
    std::string patterns;
    std::string rssi_log;
    std::string truth;
    std::vector<double> gammas{-95.0, -90.0, -85.0, -80.0, -75.0, -70.0, -65.0};
    int pf_seeds = 10;
    double window = 1.0;
    double rate = 10.0;
    int particles = 2000;
    double q_deg_s2 = 5.0;
};

int cmd_sweep_threshold(const GlobalOpts& g, const SweepThresholdOpts& o,
                        const std::vector<std::string>& argv) {
    const doa::ArrayConfig array = load_array(o.patterns, g);
    const doa::RssiLog log = doa::load_rssi_log(o.rssi_log);
    const auto truth = doa::load_ground_truth(o.truth);

    doa::FilterConfig fc;
    fc.n_particles = o.particles;
    const double q_rad = doa::deg2rad(o.q_deg_s2);
    fc.process_noise_q = q_rad * q_rad;

    const doa::GridSpec grid = doa::default_grid();
    const auto rows =
        doa::threshold_sweep_eval(log, truth, array, o.gammas, grid, fc, o.window, o.rate,
                                  o.pf_seeds, g.seed, g.threads);

    ensure_out_dir(g);
    {
        std::ofstream os(out_path(g, "threshold_sweep.csv"));
        doa::write_threshold_sweep_csv(os, rows);
    }
    json config = global_config(g);
    config["patterns"] = o.patterns;
    config["rssi_log"] = o.rssi_log;
    config["truth"] = o.truth;
    config["gammas"] = o.gammas;
    config["pf_seeds"] = o.pf_seeds;
    config["window"] = o.window;
    config["rate"] = o.rate;
    config["particles"] = o.particles;
    config["q_deg_s2"] = o.q_deg_s2;
    write_manifest(g, "sweep-threshold", config, argv, {"threshold_sweep.csv"});
    return 0;
}

int run_cli(const std::vector<std::string>& args, int depth);

int cmd_replay(const std::string& manifest_path, int depth) {
    std::ifstream in(manifest_path);
    if (!in) throw doa::InvalidInput("cannot open manifest '" + manifest_path + "'");
    json m = json::parse(in);
    if (!m.contains("argv") || !m["argv"].is_array())
        throw doa::InvalidInput("manifest has no argv record");
    std::vector<std::string> argv;
    for (const auto& a : m["argv"]) argv.push_back(a.get<std::string>());
    if (!argv.empty() && argv.front() == "--replay")
        throw doa::InvalidInput("manifest argv must not itself replay");
    return run_cli(argv, depth + 1);
}

int run_cli(const std::vector<std::string>& args, int depth) {
    if (depth > 1) throw doa::InvalidInput("nested replay is not allowed");

    CLI::App app{"DOA estimation from directional RSSI with missed detections"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(0, 1);

    GlobalOpts g;
    std::string replay_path;
    app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0 = machine parallelism)")
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--sigma", g.sigma, "Measurement noise std dev, dB")->capture_default_str();
    app.add_option("--gamma", g.gamma, "Detection threshold, dBm")->capture_default_str();
    app.add_option("--pc", g.pc, "Detection efficiency in [0, 1]")->capture_default_str();
    app.add_option("--replay", replay_path, "Re-run the argv recorded in a manifest");

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweeps or an epoch log");
    simulate->fallthrough();
    simulate->add_option("--sweep", sim.sweep, "alpha, pc or batch");
    simulate->add_option("--alpha", sim.alpha, "Source power levels, dBm")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--pc-values", sim.pc_values, "Efficiency levels for --sweep pc")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--batches", sim.batches, "Batch sizes for --sweep batch")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--psi-true", sim.psi_true,
                         "True bearings, deg (default: every degree)")
        ->delimiter(',');
    simulate->add_option("--runs", sim.runs, "Monte Carlo runs per scenario")
        ->capture_default_str();
    simulate->add_option("--batch", sim.batch, "Observations per sensor per scenario")
        ->capture_default_str();
    simulate->add_option("--n-sensors", sim.n_sensors, "Synthetic array size")
        ->capture_default_str();
    simulate->add_option("--order", sim.order, "Synthetic pattern harmonics")
        ->capture_default_str();
    simulate->add_option("--pattern", sim.pattern_file, "Pattern CSV instead of synthetic");
    simulate->add_option("--epochs", sim.epochs, "Write an epoch observation log instead");
    simulate->add_option("--dt", sim.dt, "Epoch spacing, s")->capture_default_str();
    simulate->add_option("--psi0", sim.psi0_deg, "Initial bearing for the epoch log, deg")
        ->capture_default_str();
    simulate->add_option("--rate-deg-s", sim.rate_deg_s, "Bearing rate, deg/s")
        ->capture_default_str();
    simulate->add_option("--alpha-true", sim.alpha_true, "Source power for the epoch log, dBm")
        ->capture_default_str();

    FitPatternOpts fit;
    auto* fit_pattern = app.add_subcommand("fit-pattern", "WLS Fourier fit from calibration");
    fit_pattern->fallthrough();
    fit_pattern->add_option("--calibration", fit.calibration, "Calibration CSV")->required();
    fit_pattern->add_option("--order", fit.order, "Harmonics K")->capture_default_str();

    EstimateOpts est;
    auto* estimate = app.add_subcommand("estimate", "Grid-search estimates per epoch");
    estimate->fallthrough();
    estimate->add_option("--patterns", est.patterns, "Pattern CSV")->required();
    estimate->add_option("--observations", est.observations, "Observation CSV")->required();
    estimate->add_option("--method", est.method, "proposed, baseline, full or both")
        ->capture_default_str();
    estimate->add_flag("--merge-epochs", est.merge_epochs,
                       "Estimate once from all epochs merged");
    estimate->add_option("--export-grid", est.export_grid_epoch,
                         "Epoch id whose cost grid and profile to export");

    TrackOpts trk;
    auto* track = app.add_subcommand("track", "Particle-filter tracking over epochs");
    track->fallthrough();
    track->add_option("--patterns", trk.patterns, "Pattern CSV")->required();
    track->add_option("--observations", trk.observations, "Observation CSV");
    track->add_option("--rssi-log", trk.rssi_log, "Raw RSSI log CSV");
    track->add_option("--truth", trk.truth, "Ground truth CSV for error columns");
    track->add_option("--method", trk.method, "proposed or baseline")->capture_default_str();
    track->add_option("--dt", trk.dt, "Epoch spacing for --observations, s")
        ->capture_default_str();
    track->add_option("--window", trk.window, "Batching window for --rssi-log, s")
        ->capture_default_str();
    track->add_option("--rate", trk.rate, "Expected packet rate per sensor, Hz")
        ->capture_default_str();
    track->add_option("--particles", trk.particles, "Particle count")->capture_default_str();
    track->add_option("--q-deg-s2", trk.q_deg_s2, "Process noise, deg/s^2")
        ->capture_default_str();
    track->add_option("--resample-threshold", trk.resample_threshold, "ESS fraction")
        ->capture_default_str();
    track->add_option("--clamp", trk.clamp, "Profile cost clamp")->capture_default_str();
    track->add_option("--init-psi", trk.init_psi_deg, "Point prior bearing, deg");

    SweepThresholdOpts swt;
    auto* sweep_threshold =
        app.add_subcommand("sweep-threshold", "Per-threshold tracking RMSE on field data");
    sweep_threshold->fallthrough();
    sweep_threshold->add_option("--patterns", swt.patterns, "Pattern CSV")->required();
    sweep_threshold->add_option("--rssi-log", swt.rssi_log, "Raw RSSI log CSV")->required();
    sweep_threshold->add_option("--truth", swt.truth, "Ground truth CSV")->required();
    sweep_threshold->add_option("--gammas", swt.gammas, "Analysis thresholds, dBm")
        ->delimiter(',')
        ->capture_default_str();
    sweep_threshold->add_option("--pf-seeds", swt.pf_seeds, "Filter seeds per threshold")
        ->capture_default_str();
    sweep_threshold->add_option("--window", swt.window, "Batching window, s")
        ->capture_default_str();
    sweep_threshold->add_option("--rate", swt.rate, "Expected packet rate per sensor, Hz")
        ->capture_default_str();
    sweep_threshold->add_option("--particles", swt.particles, "Particle count")
        ->capture_default_str();
    sweep_threshold->add_option("--q-deg-s2", swt.q_deg_s2, "Process noise, deg/s^2")
        ->capture_default_str();

    std::vector<const char*> cargv;
    cargv.push_back("doatool");
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (!replay_path.empty()) {
            if (app.get_subcommands().size() > 0)
                throw UsageError("--replay takes no subcommand");
            return cmd_replay(replay_path, depth);
        }
        if (app.got_subcommand(simulate)) return cmd_simulate(g, sim, args);
        if (app.got_subcommand(fit_pattern)) return cmd_fit_pattern(g, fit, args);
        if (app.got_subcommand(estimate)) return cmd_estimate(g, est, args);
        if (app.got_subcommand(track)) return cmd_track(g, trk, args);
        if (app.got_subcommand(sweep_threshold)) return cmd_sweep_threshold(g, swt, args);
        std::cerr << "error: no subcommand given (see --help)\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, 0);
}
