#include "doa/field_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "doa/angles.hpp"
#include "doa/csv.hpp"
#include "doa/errors.hpp"
#include "doa/metrics.hpp"
#include "doa/parallel.hpp"

namespace doa {

namespace {

double wrap_deg(double deg) {
    double d = std::fmod(deg, 360.0);
    if (d < 0.0) d += 360.0;
    return d;
}

std::map<std::string, std::size_t> key_index(std::span<const std::string> keys) {
    if (keys.empty()) throw InvalidInput("field data: empty sensor key list");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (!index.emplace(keys[i], i).second)
            throw InvalidInput("field data: duplicate sensor key '" + keys[i] + "'");
    return index;
}

struct WindowGrid {
    double t0 = 0.0;
    double window_s = 0.0;
    std::size_t n_windows = 0;
    std::int64_t expected_per_window = 0;
};

WindowGrid make_windows(const RssiLog& log, double window_s, double expected_rate_hz) {
    if (log.records.empty()) throw InvalidInput("field data: empty log");
    if (!(window_s > 0.0)) throw InvalidInput("field data: window must be positive");
    if (!(expected_rate_hz > 0.0)) throw InvalidInput("field data: rate must be positive");
    WindowGrid g;
    g.t0 = log.records.front().t_s;
    g.window_s = window_s;
    const double span = log.records.back().t_s - g.t0;
    g.n_windows = static_cast<std::size_t>(std::floor(span / window_s)) + 1;
    g.expected_per_window = std::llround(window_s * expected_rate_hz);
    if (g.expected_per_window < 1)
        throw InvalidInput("field data: window shorter than one packet interval");
    return g;
}

std::size_t window_of(const WindowGrid& g, double t_s) {
    const auto k = static_cast<std::ptrdiff_t>(std::floor((t_s - g.t0) / g.window_s));
    if (k < 0) return 0;
    const auto kk = static_cast<std::size_t>(k);
    return kk >= g.n_windows ? g.n_windows - 1 : kk;
}

}  // namespace

std::string make_sensor_key(const std::string& antenna_id, int channel) {
    return antenna_id + ":" + std::to_string(channel);
}

RssiLog parse_rssi_log(std::istream& in) {
    RssiLog log;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("line 1: empty RSSI log");
    ++line_no;
    csv::expect_header(line, "timestamp_s,antenna_id,channel,rssi_dbm");
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        RssiRecord rec;
        rec.t_s = csv::parse_double(fields[0], "timestamp_s", line_no);
        rec.antenna_id = fields[1];
        if (rec.antenna_id.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty antenna_id");
        rec.channel = static_cast<int>(csv::parse_int(fields[2], "channel", line_no));
        if (rec.channel != 37 && rec.channel != 38 && rec.channel != 39)
            throw ParseError("line " + std::to_string(line_no) + ": channel " +
                             std::to_string(rec.channel) + " is not an advertising channel");
        rec.rssi_dbm = csv::parse_double(fields[3], "rssi_dbm", line_no);
        if (rec.rssi_dbm < kHardwareFloorDbm - 1e-9)
            throw ParseError("line " + std::to_string(line_no) +
                             ": rssi below the hardware floor");
        if (!log.records.empty() && rec.t_s < log.records.back().t_s)
            throw ParseError("line " + std::to_string(line_no) +
                             ": timestamps must be non-decreasing");
        log.records.push_back(std::move(rec));
    }
    if (log.records.empty()) throw ParseError("RSSI log has a header but no records");
    return log;
}

RssiLog load_rssi_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open RSSI log '" + path + "'");
    return parse_rssi_log(in);
}

std::vector<std::string> sensor_keys(const RssiLog& log) {
    std::set<std::string> keys;
    for (const RssiRecord& r : log.records) keys.insert(make_sensor_key(r.antenna_id, r.channel));
    return {keys.begin(), keys.end()};
}

std::vector<GroundTruthPoint> parse_ground_truth(std::istream& in) {
    std::vector<GroundTruthPoint> truth;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("line 1: empty ground truth file");
    ++line_no;
    csv::expect_header(line, "timestamp_s,bearing_deg,distance_m");
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 3)
            throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        GroundTruthPoint p;
        p.t_s = csv::parse_double(fields[0], "timestamp_s", line_no);
        p.bearing_deg = csv::parse_double(fields[1], "bearing_deg", line_no);
        p.distance_m = csv::parse_double(fields[2], "distance_m", line_no);
        if (p.distance_m < 0.0)
            throw ParseError("line " + std::to_string(line_no) + ": negative distance");
        if (!truth.empty() && p.t_s <= truth.back().t_s)
            throw ParseError("line " + std::to_string(line_no) +
                             ": timestamps must be strictly increasing");
        truth.push_back(p);
    }
    if (truth.empty()) throw ParseError("ground truth has a header but no points");
    return truth;
}

std::vector<GroundTruthPoint> load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open ground truth '" + path + "'");
    return parse_ground_truth(in);
}

double interp_bearing_deg(std::span<const GroundTruthPoint> truth, double t_s) {
    if (truth.empty()) throw InvalidInput("ground truth: no points");
    if (t_s <= truth.front().t_s) return wrap_deg(truth.front().bearing_deg);
    if (t_s >= truth.back().t_s) return wrap_deg(truth.back().bearing_deg);
    std::size_t lo = 0, hi = truth.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (truth[mid].t_s <= t_s)
            lo = mid;
        else
            hi = mid;
    }
    const double t = (t_s - truth[lo].t_s) / (truth[hi].t_s - truth[lo].t_s);
    const double step = circular_diff_deg(truth[hi].bearing_deg, truth[lo].bearing_deg);
    return wrap_deg(truth[lo].bearing_deg + t * step);
}

std::vector<Epoch> batch_observations(const RssiLog& log,
                                      std::span<const std::string> keys, double gamma_dbm,
                                      double window_s, double expected_rate_hz) {
    if (gamma_dbm < kHardwareFloorDbm - 1e-9)
        throw InvalidInput("threshold below the hardware floor cannot be applied");
    const auto index = key_index(keys);
    const WindowGrid grid = make_windows(log, window_s, expected_rate_hz);
    const std::size_t n_sensors = keys.size();

    // received[window][sensor]: detections kept per packet, misses counted.
    std::vector<std::vector<std::vector<double>>> detections(
        grid.n_windows, std::vector<std::vector<double>>(n_sensors));
    std::vector<std::vector<std::int64_t>> received(grid.n_windows,
                                                    std::vector<std::int64_t>(n_sensors, 0));
    for (const RssiRecord& r : log.records) {
        const auto it = index.find(make_sensor_key(r.antenna_id, r.channel));
        if (it == index.end())
            throw InvalidInput("log sensor '" + make_sensor_key(r.antenna_id, r.channel) +
                               "' is not in the sensor key list");
        const std::size_t w = window_of(grid, r.t_s);
        ++received[w][it->second];
        if (r.rssi_dbm >= gamma_dbm) detections[w][it->second].push_back(r.rssi_dbm);
    }

    std::vector<Epoch> epochs(grid.n_windows);
    for (std::size_t w = 0; w < grid.n_windows; ++w) {
        epochs[w].t_s = grid.t0 + static_cast<double>(w) * grid.window_s;
        for (std::size_t m = 0; m < n_sensors; ++m) {
            for (double y : detections[w][m])
                epochs[w].obs.push_back(Observation::detection(static_cast<int>(m), y));
            const std::int64_t below = received[w][m] -
                                       static_cast<std::int64_t>(detections[w][m].size());
            const std::int64_t padding =
                std::max<std::int64_t>(0, grid.expected_per_window - received[w][m]);
            for (std::int64_t i = 0; i < below + padding; ++i)
                epochs[w].obs.push_back(Observation::miss(static_cast<int>(m)));
        }
    }
    return epochs;
}

std::vector<PcEstimate> estimate_pc(
    const RssiLog& log, std::span<const std::string> keys, double window_s,
    double expected_rate_hz,
    const std::function<double(std::size_t sensor, double t_s)>& predicted_mu_dbm,
    double gamma_dbm, double sigma_db) {
    if (!(sigma_db > 0.0)) throw InvalidInput("estimate_pc: sigma must be positive");
    if (!predicted_mu_dbm) throw InvalidInput("estimate_pc: no power predictor");
    const auto index = key_index(keys);
    const WindowGrid grid = make_windows(log, window_s, expected_rate_hz);
    const std::size_t n_sensors = keys.size();

    std::vector<std::vector<std::int64_t>> received(grid.n_windows,
                                                    std::vector<std::int64_t>(n_sensors, 0));
    for (const RssiRecord& r : log.records) {
        const auto it = index.find(make_sensor_key(r.antenna_id, r.channel));
        if (it == index.end())
            throw InvalidInput("log sensor '" + make_sensor_key(r.antenna_id, r.channel) +
                               "' is not in the sensor key list");
        ++received[window_of(grid, r.t_s)][it->second];
    }

    std::vector<PcEstimate> out(n_sensors);
    const double margin = gamma_dbm + 4.0 * sigma_db;
    for (std::size_t w = 0; w < grid.n_windows; ++w) {
        const double t_center = grid.t0 + (static_cast<double>(w) + 0.5) * grid.window_s;
        for (std::size_t m = 0; m < n_sensors; ++m) {
            if (predicted_mu_dbm(m, t_center) < margin) continue;
            out[m].expected += grid.expected_per_window;
            out[m].received += received[w][m];
        }
    }
    for (PcEstimate& e : out) {
        if (e.expected > 0) {
            e.pc = std::min(1.0, static_cast<double>(e.received) /
                                     static_cast<double>(e.expected));
            e.estimated = true;
        }
    }
    return out;
}

SigmaEstimate estimate_sigma(std::span<const CellStats> cells, double gamma_dbm,
                             double sigma_prior_db) {
    if (!(sigma_prior_db > 0.0)) throw InvalidInput("estimate_sigma: prior must be positive");
    double weighted = 0.0;
    double dof = 0.0;
    std::size_t used = 0;
    for (const CellStats& c : cells) {
        if (c.n < 2) continue;
        if (!std::isfinite(c.mean_dbm) || !std::isfinite(c.var_db2) || c.var_db2 < 0.0)
            throw InvalidInput("estimate_sigma: malformed cell");
        if (c.mean_dbm < gamma_dbm + 2.0 * sigma_prior_db) continue;
        weighted += static_cast<double>(c.n - 1) * c.var_db2;
        dof += static_cast<double>(c.n - 1);
        ++used;
    }
    if (used == 0 || dof <= 0.0) return {sigma_prior_db, 0, true};
    const double sigma = std::sqrt(weighted / dof);
    return {sigma, used, sigma == 0.0};
}

std::vector<CellStats> rssi_cells(const RssiLog& log, std::span<const std::string> keys,
                                  std::span<const GroundTruthPoint> truth, double bin_deg) {
    if (!(bin_deg > 0.0) || bin_deg > 360.0)
        throw InvalidInput("rssi_cells: bin width must be in (0, 360]");
    const auto n_bins = static_cast<std::size_t>(std::lround(360.0 / bin_deg));
    if (n_bins < 1 || std::abs(static_cast<double>(n_bins) * bin_deg - 360.0) > 1e-9)
        throw InvalidInput("rssi_cells: bin width must divide 360");
    if (truth.empty()) throw InvalidInput("rssi_cells: no ground truth");
    const auto index = key_index(keys);

    struct Welford {
        double mean = 0.0, m2 = 0.0;
        std::int64_t n = 0;
    };
    std::vector<Welford> acc(keys.size() * n_bins);
    for (const RssiRecord& r : log.records) {
        const auto it = index.find(make_sensor_key(r.antenna_id, r.channel));
        if (it == index.end())
            throw InvalidInput("log sensor '" + make_sensor_key(r.antenna_id, r.channel) +
                               "' is not in the sensor key list");
        const double bearing = interp_bearing_deg(truth, r.t_s);
        auto bin = static_cast<std::size_t>(std::floor(bearing / bin_deg));
        if (bin >= n_bins) bin = n_bins - 1;
        Welford& a = acc[it->second * n_bins + bin];
        ++a.n;
        const double d = r.rssi_dbm - a.mean;
        a.mean += d / static_cast<double>(a.n);
        a.m2 += d * (r.rssi_dbm - a.mean);
    }

    std::vector<CellStats> cells(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        cells[i].n = acc[i].n;
        cells[i].mean_dbm = acc[i].n > 0 ? acc[i].mean : 0.0;
        cells[i].var_db2 = acc[i].n > 1 ? acc[i].m2 / static_cast<double>(acc[i].n - 1) : 0.0;
    }
    return cells;
}

PdTimeline predicted_pd_timeline(std::span<const double> t_s,
                                 std::span<const double> alpha_hat_dbm,
                                 std::span<const GroundTruthPoint> truth,
                                 const ArrayConfig& array) {
    if (t_s.size() != alpha_hat_dbm.size())
        throw InvalidInput("pd timeline: time and power lists differ in length");
    PdTimeline out;
    out.t_s.assign(t_s.begin(), t_s.end());
    out.pd.resize(t_s.size());
    for (std::size_t e = 0; e < t_s.size(); ++e) {
        const double psi = deg2rad(interp_bearing_deg(truth, t_s[e]));
        out.pd[e].resize(array.size());
        for (std::size_t m = 0; m < array.size(); ++m) {
            const double mu =
                alpha_hat_dbm[e] + clamp_gain_db(eval_pattern(array.patterns[m], psi));
            const double p_alpha = detection_prob_threshold(mu, array.gamma_dbm, array.sigma);
            out.pd[e][m] = detection_prob_total(array.pc[m], p_alpha);
        }
    }
    return out;
}

PdTimeline measured_pd_timeline(const RssiLog& log, std::span<const std::string> keys,
                                double gamma_dbm, double window_s, double expected_rate_hz) {
    if (gamma_dbm < kHardwareFloorDbm - 1e-9)
        throw InvalidInput("threshold below the hardware floor cannot be applied");
    const auto index = key_index(keys);
    const WindowGrid grid = make_windows(log, window_s, expected_rate_hz);

    std::vector<std::vector<std::int64_t>> detected(grid.n_windows,
                                                    std::vector<std::int64_t>(keys.size(), 0));
    for (const RssiRecord& r : log.records) {
        const auto it = index.find(make_sensor_key(r.antenna_id, r.channel));
        if (it == index.end())
            throw InvalidInput("log sensor '" + make_sensor_key(r.antenna_id, r.channel) +
                               "' is not in the sensor key list");
        if (r.rssi_dbm >= gamma_dbm) ++detected[window_of(grid, r.t_s)][it->second];
    }

    PdTimeline out;
    out.t_s.resize(grid.n_windows);
    out.pd.resize(grid.n_windows);
    for (std::size_t w = 0; w < grid.n_windows; ++w) {
        out.t_s[w] = grid.t0 + static_cast<double>(w) * grid.window_s;
        out.pd[w].resize(keys.size());
        for (std::size_t m = 0; m < keys.size(); ++m)
            out.pd[w][m] = std::min(1.0, static_cast<double>(detected[w][m]) /
                                             static_cast<double>(grid.expected_per_window));
    }
    return out;
}

std::vector<ThresholdSweepRow> threshold_sweep_eval(
    const RssiLog& log, std::span<const GroundTruthPoint> truth, const ArrayConfig& array,
    std::span<const double> gammas_dbm, const GridSpec& grid, const FilterConfig& filter,
    double window_s, double expected_rate_hz, int n_seeds, std::uint64_t seed,
    unsigned threads) {
    if (gammas_dbm.empty()) throw InvalidInput("threshold sweep: no thresholds");
    if (n_seeds < 1) throw InvalidInput("threshold sweep: need at least one seed");
    if (truth.empty()) throw InvalidInput("threshold sweep: no ground truth");

    std::vector<std::string> keys;
    keys.reserve(array.size());
    for (const SensorPattern& p : array.patterns) keys.push_back(p.sensor_id);

    struct GammaData {
        std::vector<Epoch> epochs;
        std::vector<std::size_t> scored;  // epochs inside the truth span
        std::vector<double> truth_deg;
        double pct_missed = 0.0;
        ArrayConfig array;
    };
    std::vector<GammaData> per_gamma(gammas_dbm.size());
    for (std::size_t g = 0; g < gammas_dbm.size(); ++g) {
        GammaData& d = per_gamma[g];
        d.array = array;
        d.array.gamma_dbm = gammas_dbm[g];
        d.epochs = batch_observations(log, keys, gammas_dbm[g], window_s, expected_rate_hz);
        std::int64_t missed = 0, total = 0;
        for (const Epoch& e : d.epochs)
            for (const Observation& o : e.obs) {
                ++total;
                if (!o.detected()) ++missed;
            }
        d.pct_missed = total > 0 ? 100.0 * static_cast<double>(missed) /
                                       static_cast<double>(total)
                                 : 0.0;
        for (std::size_t k = 0; k < d.epochs.size(); ++k) {
            const double t = d.epochs[k].t_s;
            if (t >= truth.front().t_s && t <= truth.back().t_s) {
                d.scored.push_back(k);
                d.truth_deg.push_back(interp_bearing_deg(truth, t));
            }
        }
        if (d.scored.empty())
            throw InvalidInput("threshold sweep: log and reference trajectory do not overlap");
    }

    const CostKind kinds[2] = {CostKind::Simplified, CostKind::Baseline};
    const std::size_t n_tasks = gammas_dbm.size() * static_cast<std::size_t>(n_seeds) * 2;
    std::vector<double> task_rmse(n_tasks, 0.0);
    parallel_for(n_tasks, threads, [&](std::size_t task) {
        const std::size_t g = task / (static_cast<std::size_t>(n_seeds) * 2);
        const std::size_t rem = task % (static_cast<std::size_t>(n_seeds) * 2);
        const std::size_t s = rem / 2;
        const CostKind kind = kinds[rem % 2];
        const GammaData& d = per_gamma[g];
        const auto track =
            track_sequence(d.epochs, d.array, grid, filter, kind, seed + s);
        std::vector<double> est_deg(d.scored.size());
        for (std::size_t i = 0; i < d.scored.size(); ++i)
            est_deg[i] = rad2deg(track[d.scored[i]].psi_pf_rad);
        task_rmse[task] = rmse_circular_deg(est_deg, d.truth_deg);
    });

    std::vector<ThresholdSweepRow> rows;
    for (std::size_t g = 0; g < gammas_dbm.size(); ++g) {
        for (int v = 0; v < 2; ++v) {
            std::vector<double> samples(static_cast<std::size_t>(n_seeds));
            for (int s = 0; s < n_seeds; ++s)
                samples[static_cast<std::size_t>(s)] =
                    task_rmse[g * static_cast<std::size_t>(n_seeds) * 2 +
                              static_cast<std::size_t>(s) * 2 + static_cast<std::size_t>(v)];
            ThresholdSweepRow row;
            row.gamma_dbm = gammas_dbm[g];
            row.method = kinds[v];
            row.n_seeds = n_seeds;
            row.pct_missed = per_gamma[g].pct_missed;
            if (n_seeds >= 2) {
                const Ci ci = ci95(samples);
                row.rmse_mean_deg = ci.mean;
                row.rmse_lo_deg = ci.lo;
                row.rmse_hi_deg = ci.hi;
            } else {
                row.rmse_mean_deg = row.rmse_lo_deg = row.rmse_hi_deg = samples[0];
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace doa
