#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "doa/angles.hpp"
#include "doa/csv.hpp"
#include "doa/errors.hpp"
#include "doa/io.hpp"
#include "doa/pattern.hpp"
#include "doctest.h"

using namespace doa;

namespace {

std::vector<SensorPattern> sample_patterns() {
    auto base = synth_pattern(0.0, -14.0, -20.0, 3);
    return make_uca(base, 2);
}

int line_count(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n' ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("pattern files round trip bit for bit") {
    const auto patterns = sample_patterns();
    std::ostringstream os;
    write_patterns_csv(os, patterns);
    const std::string text = os.str();
    CHECK(text.rfind("sensor_id,k,re,im\n", 0) == 0);
    CHECK(line_count(text) == 1 + 2 * 7);  // header + 2 sensors x (2K+1)

    std::istringstream in(text);
    const auto loaded = load_patterns_csv(in);
    REQUIRE(loaded.size() == patterns.size());
    for (std::size_t m = 0; m < patterns.size(); ++m) {
        CHECK(loaded[m].sensor_id == patterns[m].sensor_id);
        REQUIRE(loaded[m].order == patterns[m].order);
        for (int k = -patterns[m].order; k <= patterns[m].order; ++k)
            CHECK(loaded[m].coeff(k) == patterns[m].coeff(k));
    }
}

TEST_CASE("pattern loading rejects incomplete or asymmetric sets") {
    std::istringstream missing(
        "sensor_id,k,re,im\n"
        "s0,-1,0.5,0\n"
        "s0,0,1,0\n");  // k = +1 absent
    CHECK_THROWS_AS(load_patterns_csv(missing), ParseError);

    std::istringstream asym(
        "sensor_id,k,re,im\n"
        "s0,-1,0.5,0.1\n"
        "s0,0,1,0\n"
        "s0,1,0.5,0.1\n");  // conjugate symmetry broken
    CHECK_THROWS_AS(load_patterns_csv(asym), InvalidInput);

    std::istringstream dup(
        "sensor_id,k,re,im\n"
        "s0,0,1,0\n"
        "s0,0,1,0\n");
    CHECK_THROWS_AS(load_patterns_csv(dup), ParseError);

    std::istringstream bad_header("sensor,k,re,im\n");
    CHECK_THROWS_AS(load_patterns_csv(bad_header), ParseError);
}

TEST_CASE("calibration tables round trip") {
    const std::vector<CalibrationRow> rows = {
        {"s0", 0.0, -40.25, 1.5, 12},
        {"s0", 15.0, -42.0, 2.0, 9},
        {"s1", 0.0, -55.0, 0.5, 30},
    };
    std::ostringstream os;
    write_calibration_csv(os, rows);
    std::istringstream in(os.str());
    const auto loaded = load_calibration_csv(in);
    REQUIRE(loaded.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded[i].sensor_id == rows[i].sensor_id);
        CHECK(loaded[i].angle_deg == rows[i].angle_deg);
        CHECK(loaded[i].mean_dbm == rows[i].mean_dbm);
        CHECK(loaded[i].var_db2 == rows[i].var_db2);
        CHECK(loaded[i].n_samples == rows[i].n_samples);
    }

    std::istringstream neg_var(
        "sensor_id,angle_deg,mean_dbm,var_db2,n_samples\n"
        "s0,0,-40,-1,5\n");
    CHECK_THROWS_AS(load_calibration_csv(neg_var), ParseError);
    std::istringstream zero_n(
        "sensor_id,angle_deg,mean_dbm,var_db2,n_samples\n"
        "s0,0,-40,1,0\n");
    CHECK_THROWS_AS(load_calibration_csv(zero_n), ParseError);
}

TEST_CASE("observation logs keep misses as empty fields") {
    const std::vector<std::string> ids = {"s0", "s1"};
    std::vector<Epoch> epochs(2);
    epochs[0].t_s = 0.0;
    epochs[0].obs = {Observation::detection(0, -81.25), Observation::miss(1)};
    epochs[1].t_s = 1.0;
    epochs[1].obs = {Observation::miss(0), Observation::detection(1, -79.0)};

    std::ostringstream os;
    write_observations_csv(os, epochs, ids);
    const std::string text = os.str();
    CHECK(text.find("0,s1,0,\n") != std::string::npos);
    CHECK(text.find("0,s0,1,-81.25\n") != std::string::npos);

    std::istringstream in(text);
    const auto loaded = load_observations_csv(in, ids, 0.5);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].t_s == 0.0);
    CHECK(loaded[1].t_s == 0.5);  // epoch id times the supplied spacing
    REQUIRE(loaded[0].obs.size() == 2);
    CHECK(loaded[0].obs[0].detected());
    CHECK(*loaded[0].obs[0].rssi_dbm == -81.25);
    CHECK_FALSE(loaded[0].obs[1].detected());
    CHECK(loaded[1].obs[1].detected());

    std::istringstream ghost(
        "epoch_id,sensor_id,detected,rssi_dbm\n"
        "0,s0,0,-80\n");  // a miss must not carry a value
    CHECK_THROWS_AS(load_observations_csv(ghost, ids), ParseError);

    std::istringstream headless(
        "epoch_id,sensor_id,detected,rssi_dbm\n"
        "0,s7,1,-80\n");
    CHECK_THROWS_AS(load_observations_csv(headless, ids), ParseError);

    std::istringstream empty_det(
        "epoch_id,sensor_id,detected,rssi_dbm\n"
        "0,s0,1,\n");
    CHECK_THROWS_AS(load_observations_csv(empty_det, ids), ParseError);
}

TEST_CASE("grid and profile exports carry one row per node") {
    LikelihoodGrid g;
    g.psi_rad = {0.0, deg2rad(90.0)};
    g.alpha_dbm = {-90.0, -89.0, -88.0};
    g.cost = {1, 2, 3, 4, 5, 6};
    std::ostringstream os;
    write_grid_csv(os, g);
    const std::string text = os.str();
    CHECK(line_count(text) == 7);
    CHECK(text.rfind("psi_deg,alpha_dbm,cost\n", 0) == 0);
    const std::string row = csv::format_double(rad2deg(g.psi_rad[1])) + ",-89,5\n";
    CHECK(text.find(row) != std::string::npos);

    const std::vector<ProfilePoint> prof = {{0.0, 0.25, -90.0}, {deg2rad(180.0), 0.0, -88.0}};
    std::ostringstream ps;
    write_profile_csv(ps, prof);
    CHECK(line_count(ps.str()) == 3);
    const std::string prow = csv::format_double(rad2deg(prof[1].psi_rad)) + ",0,-88\n";
    CHECK(ps.str().find(prow) != std::string::npos);
}

TEST_CASE("estimate and track exports match their documented headers") {
    EstimateRow row;
    row.epoch_id = 3;
    row.estimate.psi_rad = 0.0;
    row.estimate.alpha_dbm = -81.25;
    row.estimate.cost = 12.5;
    row.estimate.kind = CostKind::Simplified;
    row.estimate.degenerate = false;
    std::ostringstream os;
    const std::vector<EstimateRow> rows = {row};
    write_estimates_csv(os, rows);
    CHECK(os.str().rfind("epoch_id,method,psi_deg,alpha_dbm,cost,degenerate\n", 0) == 0);
    CHECK(os.str().find("3,proposed,0,-81.25,12.5,0\n") != std::string::npos);

    TrackPoint tp;
    tp.t_s = 2.5;
    tp.psi_pf_rad = deg2rad(10.0);
    tp.psi_ml_rad = deg2rad(11.0);
    tp.alpha_ml_dbm = -82.0;
    tp.n_missed = 3;
    tp.track_loss = false;
    std::ostringstream ts;
    const std::vector<TrackPoint> track = {tp};
    write_track_csv(ts, track);
    CHECK(ts.str().rfind("timestamp,psi_pf_deg,psi_ml_deg,alpha_hat_dbm,n_missed,track_loss\n",
                         0) == 0);
    CHECK(line_count(ts.str()) == 2);
}

TEST_CASE("sweep and threshold exports serialize every row") {
    SweepResult result;
    result.sweep = "alpha";
    SweepRecord rec;
    rec.psi_true_deg = 10.0;
    rec.alpha_dbm = -70.0;
    rec.pc = 1.0;
    rec.batch = 1;
    rec.run = 0;
    rec.method = CostKind::Baseline;
    rec.psi_hat_deg = 11.0;
    rec.alpha_hat_dbm = -70.25;
    rec.err_deg = 1.0;
    rec.err_alpha_db = -0.25;
    rec.n_missed = 2;
    rec.degenerate = true;
    result.records = {rec};
    SweepAggregate agg;
    agg.alpha_dbm = -70.0;
    agg.method = CostKind::Baseline;
    agg.doa_rmse_mean_deg = 12.0;
    result.aggregates = {agg};

    std::ostringstream rs;
    write_sweep_records_csv(rs, result);
    CHECK(line_count(rs.str()) == 2);
    CHECK(rs.str().find("alpha,10,-70,1,1,0,baseline,11,-70.25,1,-0.25,2,1\n") !=
          std::string::npos);

    std::ostringstream as;
    write_sweep_aggregates_csv(as, result);
    CHECK(line_count(as.str()) == 2);
    CHECK(as.str().rfind("sweep,alpha_dbm,pc,batch,method,doa_rmse_mean_deg,", 0) == 0);

    const std::vector<ThresholdSweepRow> trows = {
        {-95.0, CostKind::Simplified, 20.0, 18.0, 22.0, 35.0, 10}};
    std::ostringstream ths;
    write_threshold_sweep_csv(ths, trows);
    CHECK(ths.str().rfind("gamma_dbm,method,rmse_mean_deg,rmse_lo_deg,rmse_hi_deg,pct_missed,"
                          "n_seeds\n",
                          0) == 0);
    CHECK(ths.str().find("-95,proposed,20,18,22,35,10\n") != std::string::npos);

    PdTimeline tl;
    tl.t_s = {0.0, 1.0};
    tl.pd = {{0.5, 0.25}, {0.75, 1.0}};
    const std::vector<std::string> keys = {"a:37", "b:38"};
    std::ostringstream pd;
    write_pd_timeline_csv(pd, tl, keys);
    CHECK(pd.str().rfind("timestamp_s,a:37,b:38\n", 0) == 0);
    CHECK(line_count(pd.str()) == 3);
}
