#include "doa/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "doa/angles.hpp"
#include "doa/csv.hpp"
#include "doa/errors.hpp"

namespace doa {

namespace {

using csv::format_double;

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return in;
}

}  // namespace

void write_patterns_csv(std::ostream& os, std::span<const SensorPattern> patterns) {
    os << "sensor_id,k,re,im\n";
    for (const SensorPattern& p : patterns) {
        validate_pattern(p);
        for (int k = -p.order; k <= p.order; ++k) {
            const auto c = p.coeff(k);
            os << p.sensor_id << ',' << k << ',' << format_double(c.real()) << ','
               << format_double(c.imag()) << '\n';
        }
    }
}

std::vector<SensorPattern> load_patterns_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("line 1: empty pattern file");
    ++line_no;
    csv::expect_header(line, "sensor_id,k,re,im");

    std::vector<std::string> order_seen;
    std::map<std::string, std::map<int, std::complex<double>>> by_sensor;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        const std::string& id = fields[0];
        if (id.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty sensor_id");
        const int k = static_cast<int>(csv::parse_int(fields[1], "k", line_no));
        const double re = csv::parse_double(fields[2], "re", line_no);
        const double im = csv::parse_double(fields[3], "im", line_no);
        if (by_sensor.find(id) == by_sensor.end()) order_seen.push_back(id);
        if (!by_sensor[id].emplace(k, std::complex<double>(re, im)).second)
            throw ParseError("line " + std::to_string(line_no) + ": duplicate harmonic " +
                             std::to_string(k) + " for sensor '" + id + "'");
    }
    if (order_seen.empty()) throw ParseError("pattern file has a header but no rows");

    std::vector<SensorPattern> patterns;
    for (const std::string& id : order_seen) {
        const auto& coeffs = by_sensor[id];
        const int order = coeffs.rbegin()->first;
        if (order < 0 || coeffs.begin()->first != -order ||
            coeffs.size() != static_cast<std::size_t>(2 * order + 1))
            throw ParseError("sensor '" + id + "': harmonics must cover -K..K");
        SensorPattern p;
        p.sensor_id = id;
        p.order = order;
        p.coeffs.resize(static_cast<std::size_t>(2 * order + 1));
        for (const auto& [k, c] : coeffs) p.coeffs[static_cast<std::size_t>(k + order)] = c;
        validate_pattern(p);
        patterns.push_back(std::move(p));
    }
    return patterns;
}

std::vector<SensorPattern> load_patterns_file(const std::string& path) {
    auto in = open_in(path);
    return load_patterns_csv(in);
}

void write_patterns_file(const std::string& path, std::span<const SensorPattern> patterns) {
    auto os = open_out(path);
    write_patterns_csv(os, patterns);
}

void write_calibration_csv(std::ostream& os, std::span<const CalibrationRow> rows) {
    os << "sensor_id,angle_deg,mean_dbm,var_db2,n_samples\n";
    for (const CalibrationRow& r : rows)
        os << r.sensor_id << ',' << format_double(r.angle_deg) << ','
           << format_double(r.mean_dbm) << ',' << format_double(r.var_db2) << ',' << r.n_samples
           << '\n';
}

std::vector<CalibrationRow> load_calibration_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("line 1: empty calibration file");
    ++line_no;
    csv::expect_header(line, "sensor_id,angle_deg,mean_dbm,var_db2,n_samples");
    std::vector<CalibrationRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 5)
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        CalibrationRow r;
        r.sensor_id = fields[0];
        if (r.sensor_id.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty sensor_id");
        r.angle_deg = csv::parse_double(fields[1], "angle_deg", line_no);
        r.mean_dbm = csv::parse_double(fields[2], "mean_dbm", line_no);
        r.var_db2 = csv::parse_double(fields[3], "var_db2", line_no);
        if (r.var_db2 < 0.0)
            throw ParseError("line " + std::to_string(line_no) + ": negative variance");
        r.n_samples = csv::parse_int(fields[4], "n_samples", line_no);
        if (r.n_samples < 1)
            throw ParseError("line " + std::to_string(line_no) + ": n_samples must be positive");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError("calibration file has a header but no rows");
    return rows;
}

std::vector<CalibrationRow> load_calibration_file(const std::string& path) {
    auto in = open_in(path);
    return load_calibration_csv(in);
}

void write_observations_csv(std::ostream& os, std::span<const Epoch> epochs,
                            std::span<const std::string> sensor_ids) {
    os << "epoch_id,sensor_id,detected,rssi_dbm\n";
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        for (const Observation& o : epochs[e].obs) {
            if (o.sensor < 0 || static_cast<std::size_t>(o.sensor) >= sensor_ids.size())
                throw InvalidInput("observation sensor index outside the id list");
            os << e << ',' << sensor_ids[static_cast<std::size_t>(o.sensor)] << ','
               << (o.detected() ? 1 : 0) << ','
               << (o.detected() ? format_double(*o.rssi_dbm) : std::string{}) << '\n';
        }
    }
}

std::vector<Epoch> load_observations_csv(std::istream& in,
                                         std::span<const std::string> sensor_ids,
                                         double epoch_dt_s) {
    if (!(epoch_dt_s > 0.0)) throw InvalidInput("observations: epoch spacing must be positive");
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < sensor_ids.size(); ++i)
        index.emplace(sensor_ids[i], static_cast<int>(i));

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("line 1: empty observation file");
    ++line_no;
    csv::expect_header(line, "epoch_id,sensor_id,detected,rssi_dbm");

    std::map<long long, std::vector<Observation>> by_epoch;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        const long long epoch = csv::parse_int(fields[0], "epoch_id", line_no);
        if (epoch < 0) throw ParseError("line " + std::to_string(line_no) + ": negative epoch");
        const auto it = index.find(fields[1]);
        if (it == index.end())
            throw ParseError("line " + std::to_string(line_no) + ": unknown sensor '" +
                             fields[1] + "'");
        const long long detected = csv::parse_int(fields[2], "detected", line_no);
        if (detected != 0 && detected != 1)
            throw ParseError("line " + std::to_string(line_no) + ": detected must be 0 or 1");
        if (detected == 1) {
            const double y = csv::parse_double(fields[3], "rssi_dbm", line_no);
            by_epoch[epoch].push_back(Observation::detection(it->second, y));
        } else {
            if (!fields[3].empty())
                throw ParseError("line " + std::to_string(line_no) +
                                 ": a miss must not carry an rssi value");
            by_epoch[epoch].push_back(Observation::miss(it->second));
        }
    }
    if (by_epoch.empty()) throw ParseError("observation file has a header but no rows");

    std::vector<Epoch> epochs;
    for (auto& [id, obs] : by_epoch) {
        Epoch e;
        e.t_s = static_cast<double>(id) * epoch_dt_s;
        e.obs = std::move(obs);
        epochs.push_back(std::move(e));
    }
    return epochs;
}

std::vector<Epoch> load_observations_file(const std::string& path,
                                          std::span<const std::string> sensor_ids,
                                          double epoch_dt_s) {
    auto in = open_in(path);
    return load_observations_csv(in, sensor_ids, epoch_dt_s);
}

void write_observations_file(const std::string& path, std::span<const Epoch> epochs,
                             std::span<const std::string> sensor_ids) {
    auto os = open_out(path);
    write_observations_csv(os, epochs, sensor_ids);
}

void write_grid_csv(std::ostream& os, const LikelihoodGrid& grid) {
    os << "psi_deg,alpha_dbm,cost\n";
    for (std::size_t i = 0; i < grid.n_psi(); ++i)
        for (std::size_t j = 0; j < grid.n_alpha(); ++j)
            os << format_double(rad2deg(grid.psi_rad[i])) << ','
               << format_double(grid.alpha_dbm[j]) << ',' << format_double(grid.at(i, j))
               << '\n';
}

void write_profile_csv(std::ostream& os, std::span<const ProfilePoint> profile) {
    os << "psi_deg,min_cost_over_alpha,argmin_alpha_dbm\n";
    for (const ProfilePoint& p : profile)
        os << format_double(rad2deg(p.psi_rad)) << ',' << format_double(p.cost) << ','
           << format_double(p.alpha_dbm) << '\n';
}

void write_estimates_csv(std::ostream& os, std::span<const EstimateRow> rows) {
    os << "epoch_id,method,psi_deg,alpha_dbm,cost,degenerate\n";
    for (const EstimateRow& r : rows)
        os << r.epoch_id << ',' << cost_kind_name(r.estimate.kind) << ','
           << format_double(rad2deg(r.estimate.psi_rad)) << ','
           << format_double(r.estimate.alpha_dbm) << ',' << format_double(r.estimate.cost) << ','
           << (r.estimate.degenerate ? 1 : 0) << '\n';
}

void write_track_csv(std::ostream& os, std::span<const TrackPoint> track) {
    os << "timestamp,psi_pf_deg,psi_ml_deg,alpha_hat_dbm,n_missed,track_loss\n";
    for (const TrackPoint& p : track)
        os << format_double(p.t_s) << ',' << format_double(rad2deg(p.psi_pf_rad)) << ','
           << format_double(rad2deg(p.psi_ml_rad)) << ',' << format_double(p.alpha_ml_dbm) << ','
           << p.n_missed << ',' << (p.track_loss ? 1 : 0) << '\n';
}

void write_sweep_records_csv(std::ostream& os, const SweepResult& result) {
    os << "sweep,psi_true_deg,alpha_dbm,pc,batch,run,method,psi_hat_deg,alpha_hat_dbm,"
          "err_deg,err_alpha_db,n_missed,degenerate\n";
    for (const SweepRecord& r : result.records)
        os << result.sweep << ',' << format_double(r.psi_true_deg) << ','
           << format_double(r.alpha_dbm) << ',' << format_double(r.pc) << ',' << r.batch << ','
           << r.run << ',' << cost_kind_name(r.method) << ',' << format_double(r.psi_hat_deg)
           << ',' << format_double(r.alpha_hat_dbm) << ',' << format_double(r.err_deg) << ','
           << format_double(r.err_alpha_db) << ',' << r.n_missed << ','
           << (r.degenerate ? 1 : 0) << '\n';
}

void write_sweep_aggregates_csv(std::ostream& os, const SweepResult& result) {
    os << "sweep,alpha_dbm,pc,batch,method,doa_rmse_mean_deg,doa_rmse_std_deg,"
          "alpha_rmse_mean_db,alpha_rmse_std_db,mean_missed\n";
    for (const SweepAggregate& a : result.aggregates)
        os << result.sweep << ',' << format_double(a.alpha_dbm) << ',' << format_double(a.pc)
           << ',' << a.batch << ',' << cost_kind_name(a.method) << ','
           << format_double(a.doa_rmse_mean_deg) << ',' << format_double(a.doa_rmse_std_deg)
           << ',' << format_double(a.alpha_rmse_mean_db) << ','
           << format_double(a.alpha_rmse_std_db) << ',' << format_double(a.mean_missed) << '\n';
}

void write_threshold_sweep_csv(std::ostream& os, std::span<const ThresholdSweepRow> rows) {
    os << "gamma_dbm,method,rmse_mean_deg,rmse_lo_deg,rmse_hi_deg,pct_missed,n_seeds\n";
    for (const ThresholdSweepRow& r : rows)
        os << format_double(r.gamma_dbm) << ',' << cost_kind_name(r.method) << ','
           << format_double(r.rmse_mean_deg) << ',' << format_double(r.rmse_lo_deg) << ','
           << format_double(r.rmse_hi_deg) << ',' << format_double(r.pct_missed) << ','
           << r.n_seeds << '\n';
}

void write_pd_timeline_csv(std::ostream& os, const PdTimeline& timeline,
                           std::span<const std::string> sensor_keys) {
    os << "timestamp_s";
    for (const std::string& k : sensor_keys) os << ',' << k;
    os << '\n';
    for (std::size_t e = 0; e < timeline.t_s.size(); ++e) {
        if (timeline.pd[e].size() != sensor_keys.size())
            throw InvalidInput("pd timeline row does not match the sensor key list");
        os << format_double(timeline.t_s[e]);
        for (double p : timeline.pd[e]) os << ',' << format_double(p);
        os << '\n';
    }
}

}  // namespace doa
