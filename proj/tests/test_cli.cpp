#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doa/angles.hpp"
#include "doa/io.hpp"
#include "doa/pattern.hpp"
#include "doa/rng.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
    const fs::path p = fs::temp_directory_path() / "doatool_cli_tests";
    fs::create_directories(p);
    return p;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = scratch_root() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_tool(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "_stdout.txt";
    const fs::path err = dir / "_stderr.txt";
    const std::string cmd = std::string(DOATOOL_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n' ? 1 : 0;
    return n;
}

void write_field_fixture(const fs::path& log_path, const fs::path& truth_path,
                         const fs::path& patterns_path) {
    auto base = doa::synth_pattern();
    auto sensors = doa::make_uca(base, 4);
    const char* antennas[] = {"a0", "a1", "a2", "a3"};
    for (std::size_t m = 0; m < sensors.size(); ++m)
        sensors[m].sensor_id = std::string(antennas[m]) + ":37";
    {
        std::ofstream os(patterns_path);
        doa::write_patterns_csv(os, sensors);
    }
    doa::Rng rng(404);
    std::ofstream log(log_path);
    log << "timestamp_s,antenna_id,channel,rssi_dbm\n";
    const double rate = 5.0, span = 24.0;
    for (int i = 0; i < int(span * rate); ++i) {
        const double t = i / rate;
        const double psi = doa::deg2rad(50.0 + 2.0 * t);
        for (std::size_t m = 0; m < sensors.size(); ++m) {
            if (!rng.bernoulli(0.9)) continue;
            const double y = -74.0 + doa::eval_pattern(sensors[m], psi) + 2.0 * rng.normal();
            if (y < -95.0) continue;
            log << t << ',' << antennas[m] << ",37," << y << '\n';
        }
    }
    std::ofstream truth(truth_path);
    truth << "timestamp_s,bearing_deg,distance_m\n";
    truth << "0.0,50,5\n24.0,98,5\n";
}

}  // namespace

TEST_CASE("cli exit codes distinguish usage errors") {
    const fs::path dir = fresh_dir("exit_codes");
    CHECK(run_tool("--version", dir).exit_code == 0);
    CHECK(run_tool("--help", dir).exit_code == 0);

    const RunResult none = run_tool("", dir);
    CHECK(none.exit_code == 2);
    CHECK(none.err.find("error:") != std::string::npos);

    CHECK(run_tool("--no-such-flag", dir).exit_code == 2);
    CHECK(run_tool("frobnicate", dir).exit_code == 2);

    const std::string out = " --out-dir " + (dir / "out").string();
    CHECK(run_tool("simulate" + out, dir).exit_code == 2);  // no sweep, no epochs
    CHECK(run_tool("simulate --sweep alpha --alpha -70 --runs 0 --psi-true 0" + out, dir)
              .exit_code == 2);
    CHECK(run_tool("simulate --sweep nonsense --alpha -70 --psi-true 0" + out, dir).exit_code ==
          2);
    CHECK(run_tool("simulate --sweep alpha --alpha -70 --epochs 3" + out, dir).exit_code == 2);
    CHECK(run_tool("estimate", dir).exit_code == 2);  // missing required options

    // Runtime failures (not usage) exit with 1.
    const RunResult missing = run_tool(
        "estimate --patterns /nonexistent.csv --observations /nonexistent.csv" + out, dir);
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("simulation sweeps are reproducible byte for byte") {
    const fs::path a = fresh_dir("sweep_a");
    const fs::path b = fresh_dir("sweep_b");
    const fs::path c = fresh_dir("sweep_c");
    const std::string base =
        "simulate --sweep alpha --alpha -70,-85 --psi-true 0,90,215 --runs 2";

    CHECK(run_tool(base + " --seed 9 --out-dir " + (a / "out").string(), a).exit_code == 0);
    CHECK(run_tool(base + " --seed 9 --out-dir " + (b / "out").string(), b).exit_code == 0);
    CHECK(run_tool(base + " --seed 10 --out-dir " + (c / "out").string(), c).exit_code == 0);

    for (const char* f : {"patterns.csv", "sweep_records.csv", "sweep_aggregates.csv"}) {
        CHECK(fs::exists(a / "out" / f));
        CHECK(slurp(a / "out" / f) == slurp(b / "out" / f));
    }
    CHECK(slurp(a / "out" / "sweep_records.csv") != slurp(c / "out" / "sweep_records.csv"));

    // 2 levels x 3 angles x 2 runs x 2 methods + header
    CHECK(count_lines(slurp(a / "out" / "sweep_records.csv")) == 25);
    CHECK(fs::exists(a / "out" / "manifest.json"));
    CHECK(slurp(a / "out" / "manifest.json").find("\"simulate\"") != std::string::npos);

    // Worker count must not change the output.
    const fs::path d = fresh_dir("sweep_d");
    CHECK(run_tool(base + " --seed 9 --threads 3 --out-dir " + (d / "out").string(), d)
              .exit_code == 0);
    CHECK(slurp(a / "out" / "sweep_records.csv") == slurp(d / "out" / "sweep_records.csv"));
}

TEST_CASE("a recorded manifest replays to identical outputs") {
    const fs::path dir = fresh_dir("replay");
    const std::string out = (dir / "out").string();
    CHECK(run_tool("simulate --sweep pc --alpha -80 --pc-values 0.7,1.0 --psi-true 10,200 "
                   "--runs 2 --seed 4 --out-dir " +
                       out,
                   dir)
              .exit_code == 0);
    const std::string first = slurp(dir / "out" / "sweep_records.csv");
    REQUIRE(!first.empty());

    CHECK(run_tool("--replay " + out + "/manifest.json", dir).exit_code == 0);
    CHECK(slurp(dir / "out" / "sweep_records.csv") == first);
}

TEST_CASE("epoch simulation feeds estimation and tracking") {
    const fs::path dir = fresh_dir("pipeline");
    const std::string out = (dir / "out").string();
    CHECK(run_tool("simulate --epochs 5 --psi0 120 --alpha-true -70 --seed 2 --out-dir " + out,
                   dir)
              .exit_code == 0);
    CHECK(fs::exists(dir / "out" / "observations.csv"));
    CHECK(fs::exists(dir / "out" / "truth.csv"));
    CHECK(fs::exists(dir / "out" / "patterns.csv"));

    const std::string est_out = (dir / "est").string();
    const RunResult est = run_tool("estimate --patterns " + out + "/patterns.csv" +
                                       " --observations " + out +
                                       "/observations.csv --method both --out-dir " + est_out,
                                   dir);
    CHECK(est.exit_code == 0);
    const std::string estimates = slurp(dir / "est" / "estimates.csv");
    CHECK(count_lines(estimates) == 1 + 5 * 2);
    CHECK(estimates.find("proposed") != std::string::npos);
    CHECK(estimates.find("baseline") != std::string::npos);

    const std::string trk_out = (dir / "trk").string();
    const RunResult trk = run_tool("track --patterns " + out + "/patterns.csv" +
                                       " --observations " + out + "/observations.csv" +
                                       " --truth " + out +
                                       "/truth.csv --particles 500 --out-dir " + trk_out,
                                   dir);
    CHECK(trk.exit_code == 0);
    CHECK(trk.out.find("rmse_deg=") != std::string::npos);
    const std::string track = slurp(dir / "trk" / "track.csv");
    CHECK(count_lines(track) == 1 + 5);
    CHECK(track.rfind("timestamp,", 0) == 0);
    CHECK(track.find("err_pf_deg") != std::string::npos);
}

TEST_CASE("grid export writes the full surface") {
    const fs::path dir = fresh_dir("grid_export");
    const std::string out = (dir / "out").string();
    CHECK(run_tool("simulate --epochs 2 --alpha-true -75 --seed 6 --out-dir " + out, dir)
              .exit_code == 0);
    const std::string est_out = (dir / "est").string();
    CHECK(run_tool("estimate --patterns " + out + "/patterns.csv --observations " + out +
                       "/observations.csv --method proposed --export-grid 0 --out-dir " +
                       est_out,
                   dir)
              .exit_code == 0);
    CHECK(count_lines(slurp(dir / "est" / "grid_proposed_0.csv")) == 1 + 360 * 501);
    CHECK(count_lines(slurp(dir / "est" / "profile_proposed_0.csv")) == 1 + 360);
}

TEST_CASE("pattern fitting consumes calibration tables") {
    const fs::path dir = fresh_dir("fit");
    auto truth = doa::synth_pattern(0.0, -14.0, -20.0, 3);

    std::ofstream cal(dir / "calibration.csv");
    cal << "sensor_id,angle_deg,mean_dbm,var_db2,n_samples\n";
    for (int i = 0; i < 24; ++i) {
        const double ang = i * 15.0;
        cal << "rx0," << ang << ',' << doa::eval_pattern(truth, doa::deg2rad(ang)) - 60.0
            << ",1,10\n";
    }
    cal.close();

    const std::string out = (dir / "out").string();
    const RunResult fit = run_tool("fit-pattern --calibration " +
                                       (dir / "calibration.csv").string() +
                                       " --order 3 --out-dir " + out,
                                   dir);
    CHECK(fit.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "patterns.csv"));
    const std::string residuals = slurp(dir / "out" / "residuals.csv");
    CHECK(residuals.rfind("sensor_id,residual_rms_db,n_samples\n", 0) == 0);
    CHECK(count_lines(residuals) == 2);

    // Too few distinct angles for the requested order.
    std::ofstream bad(dir / "bad.csv");
    bad << "sensor_id,angle_deg,mean_dbm,var_db2,n_samples\n";
    bad << "rx0,0,-60,1,10\nrx0,10,-61,1,10\nrx0,20,-62,1,10\n";
    bad.close();
    const RunResult rank = run_tool("fit-pattern --calibration " + (dir / "bad.csv").string() +
                                        " --order 7 --out-dir " + (dir / "out2").string(),
                                    dir);
    CHECK(rank.exit_code == 1);
    CHECK(rank.err.find("error:") != std::string::npos);
}

TEST_CASE("threshold sweeps run on field-format logs") {
    const fs::path dir = fresh_dir("sweep_threshold");
    write_field_fixture(dir / "rssi.csv", dir / "truth.csv", dir / "patterns.csv");
    const std::string patterns = (dir / "patterns.csv").string();

    const std::string out = (dir / "out").string();
    const RunResult r = run_tool(
        "sweep-threshold --patterns " + patterns + " --rssi-log " +
            (dir / "rssi.csv").string() + " --truth " + (dir / "truth.csv").string() +
            " --gammas -95,-88 --pf-seeds 2 --particles 300 --window 2 --rate 5 --out-dir " +
            out,
        dir);
    CHECK(r.exit_code == 0);
    const std::string rows = slurp(dir / "out" / "threshold_sweep.csv");
    CHECK(count_lines(rows) == 1 + 2 * 2);
    CHECK(rows.find("-88,proposed") != std::string::npos);
    CHECK(rows.find("-88,baseline") != std::string::npos);

    const RunResult floor = run_tool(
        "sweep-threshold --patterns " + patterns + " --rssi-log " +
            (dir / "rssi.csv").string() + " --truth " + (dir / "truth.csv").string() +
            " --gammas -120 --pf-seeds 1 --out-dir " + (dir / "out2").string(),
        dir);
    CHECK(floor.exit_code != 0);
    CHECK(floor.err.find("error:") != std::string::npos);
}
