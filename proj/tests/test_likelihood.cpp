#include <cmath>
#include <memory>
#include <vector>

#include "doa/angles.hpp"
#include "doa/detection.hpp"
#include "doa/errors.hpp"
#include "doa/likelihood.hpp"
#include "doa/rng.hpp"
#include "doctest.h"

using namespace doa;

namespace {

SensorPattern flat_pattern(double gain_db, std::string id) {
    SensorPattern p;
    p.sensor_id = std::move(id);
    p.order = 0;
    p.coeffs = {{gain_db, 0.0}};
    return p;
}

ArrayConfig flat_array(std::vector<double> gains_db, double sigma, double gamma, double pc) {
    std::vector<SensorPattern> ps;
    for (std::size_t i = 0; i < gains_db.size(); ++i)
        ps.push_back(flat_pattern(gains_db[i], "s" + std::to_string(i)));
    return make_array(std::move(ps), sigma, gamma, pc);
}

// Gains -3/0/+2 dB, sigma 2, gamma -95, pc 0.7; sensor 0 missed, the
// others detected. At alpha = -90 the reference costs below were computed
// independently in extended precision.
const std::vector<Observation> kOracleObs = {
    Observation::miss(0),
    Observation::detection(1, -91.2),
    Observation::detection(2, -86.5),
};

ArrayConfig oracle_array() { return flat_array({-3.0, 0.0, 2.0}, 2.0, -95.0, 0.7); }

std::vector<Observation> random_obs(const ArrayConfig& array, const SourceState& state,
                                    int batch, Rng& rng) {
    std::vector<Observation> obs;
    for (int b = 0; b < batch; ++b)
        for (std::size_t m = 0; m < array.size(); ++m)
            obs.push_back(simulate_observation(state, array, static_cast<int>(m), rng));
    return obs;
}

}  // namespace

TEST_CASE("default grid axes are the documented lattices") {
    const GridSpec g = default_grid();
    REQUIRE(g.psi_rad.size() == 360);
    REQUIRE(g.alpha_dbm.size() == 501);
    for (std::size_t i = 0; i < g.psi_rad.size(); ++i)
        CHECK(g.psi_rad[i] == deg2rad(double(i)));
    for (std::size_t j = 0; j < g.alpha_dbm.size(); ++j)
        CHECK(g.alpha_dbm[j] == (double(j) - 500.0) / 5.0);
    CHECK(g.alpha_dbm.front() == -100.0);
    CHECK(g.alpha_dbm.back() == 0.0);
}

TEST_CASE("custom grid construction validates its arguments") {
    const GridSpec g = make_grid(2.0, -90.0, -80.0, 0.5);
    CHECK(g.psi_rad.size() == 180);
    CHECK(g.alpha_dbm.size() == 21);
    CHECK(g.alpha_dbm.front() == doctest::Approx(-90.0));
    CHECK(g.alpha_dbm.back() == doctest::Approx(-80.0));

    CHECK_THROWS_AS(make_grid(0.0, -90.0, -80.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(make_grid(1.0, -80.0, -90.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(make_grid(1.0, -90.0, -80.0, -0.5), InvalidInput);
}

TEST_CASE("miss penalty matches reference values") {
    CHECK(MissTermTable::exact(0.7, 0.0) ==
          doctest::Approx(0.43078291609245425738).epsilon(1e-14));
    CHECK(MissTermTable::exact(0.7, 1.75) ==
          doctest::Approx(1.1146154291622909978).epsilon(1e-14));
    CHECK(MissTermTable::exact(1.0, 2.5) ==
          doctest::Approx(5.0816482772786904984).epsilon(1e-14));
    CHECK(MissTermTable::exact(0.3, -3.0) ==
          doctest::Approx(0.00040505143174542327).epsilon(1e-12));
    CHECK(MissTermTable::exact(0.0, 1.0) == 0.0);

    // With certain efficiency the penalty is the negative log survival.
    for (double z : {-5.0, 0.0, 3.0, 31.5, 80.0})
        CHECK(MissTermTable::exact(1.0, z) == doctest::Approx(-log_normal_sf(z)).epsilon(1e-14));

    // Monotone nondecreasing in z: a miss is more surprising when the mean
    // sits further above the threshold.
    for (double pc : {0.3, 0.7, 1.0}) {
        double prev = MissTermTable::exact(pc, -41.0);
        for (double z = -40.0; z <= 72.0; z += 0.37) {
            const double cur = MissTermTable::exact(pc, z);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("miss penalty derivative matches finite differences") {
    for (double pc : {0.3, 0.7, 1.0}) {
        for (double z = -12.0; z <= 12.0; z += 0.61) {
            const double h = 1e-5;
            const double fd =
                (MissTermTable::exact(pc, z + h) - MissTermTable::exact(pc, z - h)) / (2 * h);
            const double an = MissTermTable::exact_deriv(pc, z);
            CHECK(an == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("tabulated miss penalty tracks the direct form") {
    Rng rng(314);
    for (double pc : {0.05, 0.3, 0.7, 0.95, 1.0}) {
        auto table = MissTermTable::get(pc);
        double worst = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double z = rng.uniform(-40.0, 70.0);
            const double got = (*table)(z);
            const double want = MissTermTable::exact(pc, z);
            worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
        }
        CHECK(worst < 5e-12);
        // Outside the tabulated span evaluation falls back to the direct form.
        for (double z : {-40.001, -77.0, 70.0, 71.5, 200.0})
            CHECK((*table)(z) == MissTermTable::exact(pc, z));
    }
    CHECK(MissTermTable::get(0.7).get() == MissTermTable::get(0.7).get());
}

TEST_CASE("scalar costs match extended-precision references") {
    const auto array = oracle_array();
    const SourceState state{0.3, -90.0};
    CHECK(nll_simplified(kOracleObs, array, state) ==
          doctest::Approx(2.0636191943006945).epsilon(1e-12));
    CHECK(nll_full(kOracleObs, array, state) ==
          doctest::Approx(5.2877906218299306).epsilon(1e-12));
    CHECK(nll_baseline(kOracleObs, array, state) ==
          doctest::Approx(0.46125).epsilon(1e-12));
    CHECK(nll_simplified_dalpha(kOracleObs, array, state) ==
          doctest::Approx(0.13102838029073578).epsilon(1e-11));
}

TEST_CASE("full cost equals the joint probability computed directly") {
    // -log of: product over detections of pc * N(y; mu, sigma), times
    // product over misses of (1 - pc * Phi((mu - gamma)/sigma)).
    const auto array = oracle_array();
    const SourceState state{1.2, -90.0};
    const std::vector<double> mu = {-93.0, -90.0, -88.0};
    double prob = 1.0;
    for (const auto& o : kOracleObs) {
        const auto m = static_cast<std::size_t>(o.sensor);
        if (o.detected()) {
            const double r = (*o.rssi_dbm - mu[m]) / 2.0;
            prob *= 0.7 * std::exp(-0.5 * r * r) / (2.0 * std::exp(kLogSqrt2Pi));
        } else {
            prob *= 1.0 - 0.7 * normal_cdf((mu[m] + 95.0) / 2.0);
        }
    }
    CHECK(nll_full(kOracleObs, array, state) == doctest::Approx(-std::log(prob)).epsilon(1e-12));
}

TEST_CASE("full and reduced costs differ by a state-independent constant") {
    auto base = synth_pattern();
    auto array = make_array(make_uca(base, 4), 2.0, -95.0, 0.8);
    Rng rng(77);
    const auto obs = random_obs(array, {deg2rad(120.0), -85.0}, 2, rng);

    const SourceState ref{0.0, -80.0};
    const double offset = nll_full(obs, array, ref) - nll_simplified(obs, array, ref);
    CHECK(offset > 0.0);
    for (int i = 0; i < 200; ++i) {
        const SourceState s{rng.uniform(0.0, kTwoPi), rng.uniform(-100.0, -60.0)};
        const double d = nll_full(obs, array, s) - nll_simplified(obs, array, s);
        CHECK(d == doctest::Approx(offset).epsilon(1e-11));
    }
}

TEST_CASE("analytic power derivative matches central differences") {
    auto array = make_array(make_uca(synth_pattern(), 4), 2.0, -95.0, 0.7);
    Rng rng(55);
    const auto obs = random_obs(array, {deg2rad(200.0), -88.0}, 1, rng);
    for (int i = 0; i < 50; ++i) {
        const SourceState s{rng.uniform(0.0, kTwoPi), rng.uniform(-98.0, -70.0)};
        const double h = 1e-4;
        const double fd = (nll_simplified(obs, array, {s.psi_rad, s.alpha_dbm + h}) -
                           nll_simplified(obs, array, {s.psi_rad, s.alpha_dbm - h})) /
                          (2 * h);
        CHECK(nll_simplified_dalpha(obs, array, s) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("grid evaluation equals the scalar cost node for node") {
    auto array = make_array(make_uca(synth_pattern(), 3), 2.0, -95.0, 0.85);
    Rng rng(909);
    const auto obs = random_obs(array, {deg2rad(33.0), -87.0}, 1, rng);
    const GridSpec grid = make_grid(10.0, -95.0, -75.0, 2.5);

    for (CostKind kind : {CostKind::Simplified, CostKind::Full, CostKind::Baseline}) {
        const LikelihoodGrid lg = eval_grid(obs, array, grid, kind);
        REQUIRE(lg.n_psi() == grid.psi_rad.size());
        REQUIRE(lg.n_alpha() == grid.alpha_dbm.size());
        for (std::size_t i = 0; i < lg.n_psi(); i += 3) {
            for (std::size_t j = 0; j < lg.n_alpha(); j += 2) {
                const SourceState s{grid.psi_rad[i], grid.alpha_dbm[j]};
                double want = 0.0;
                if (kind == CostKind::Simplified)
                    want = nll_simplified(obs, array, s);
                else if (kind == CostKind::Full)
                    want = nll_full(obs, array, s);
                else
                    want = nll_baseline(obs, array, s);
                CHECK(lg.at(i, j) == want);  // same arithmetic path, exact match
            }
        }
    }
}

TEST_CASE("precomputed gain tables reproduce the per-call grid") {
    auto array = make_array(make_uca(synth_pattern(), 4), 2.0, -95.0, 0.9);
    Rng rng(31);
    const auto obs = random_obs(array, {deg2rad(290.0), -82.0}, 1, rng);
    const GridSpec grid = make_grid(5.0, -100.0, -70.0, 1.0);
    const GainTable gains = precompute_gains(array, grid.psi_rad);

    REQUIRE(gains.n_sensors == array.size());
    for (std::size_t m = 0; m < array.size(); ++m)
        for (std::size_t i = 0; i < grid.psi_rad.size(); ++i)
            CHECK(gains.at(m, i) ==
                  clamp_gain_db(eval_pattern(array.patterns[m], grid.psi_rad[i])));

    const LikelihoodGrid a = eval_grid(obs, array, grid, CostKind::Simplified);
    const LikelihoodGrid b =
        eval_grid_with_gains(obs, array, gains, grid.alpha_dbm, CostKind::Simplified);
    REQUIRE(a.cost.size() == b.cost.size());
    for (std::size_t i = 0; i < a.cost.size(); ++i) CHECK(a.cost[i] == b.cost[i]);
}

TEST_CASE("batched observations accumulate cost additively") {
    auto array = oracle_array();
    std::vector<Observation> doubled = kOracleObs;
    doubled.insert(doubled.end(), kOracleObs.begin(), kOracleObs.end());
    const SourceState s{0.0, -91.3};
    CHECK(nll_simplified(doubled, array, s) ==
          doctest::Approx(2.0 * nll_simplified(kOracleObs, array, s)).epsilon(1e-13));
    CHECK(nll_baseline(doubled, array, s) ==
          doctest::Approx(2.0 * nll_baseline(kOracleObs, array, s)).epsilon(1e-13));
}

TEST_CASE("detections from a switched-off sensor are impossible") {
    auto array = flat_array({0.0, 0.0}, 2.0, -95.0, 0.0);
    const std::vector<Observation> obs = {Observation::detection(0, -90.0),
                                          Observation::miss(1)};
    const SourceState s{0.0, -90.0};
    CHECK(is_impossible_cost(nll_simplified(obs, array, s)));
    CHECK(is_impossible_cost(nll_full(obs, array, s)));

    const LikelihoodGrid g =
        eval_grid(obs, array, make_grid(90.0, -95.0, -90.0, 5.0), CostKind::Simplified);
    for (double c : g.cost) CHECK(is_impossible_cost(c));

    // Misses from a switched-off sensor carry no penalty at all.
    const std::vector<Observation> only_miss = {Observation::miss(0), Observation::miss(1)};
    CHECK(nll_simplified(only_miss, array, s) == 0.0);
}

TEST_CASE("malformed observation sets are rejected") {
    auto array = oracle_array();
    const SourceState s{0.0, -90.0};
    const std::vector<Observation> below = {Observation::detection(0, -96.0)};
    CHECK_THROWS_AS(nll_simplified(below, array, s),
                    MalformedObservation);  // detected below the threshold
    const std::vector<Observation> not_finite = {Observation::detection(0, std::nan(""))};
    CHECK_THROWS_AS(nll_simplified(not_finite, array, s), MalformedObservation);
    const std::vector<Observation> bad_sensor = {Observation::detection(7, -90.0)};
    CHECK_THROWS_AS(nll_simplified(bad_sensor, array, s), InvalidInput);
    const std::vector<Observation> neg_sensor = {Observation::miss(-1)};
    CHECK_THROWS_AS(nll_simplified(neg_sensor, array, s), InvalidInput);
    CHECK_THROWS_AS(nll_simplified(kOracleObs, array, {std::nan(""), -90.0}), InvalidInput);
}

TEST_CASE("detections-only cost needs at least one detection") {
    auto array = oracle_array();
    const std::vector<Observation> misses = {Observation::miss(0), Observation::miss(1),
                                             Observation::miss(2)};
    CHECK_THROWS_AS(nll_baseline(misses, array, {0.0, -90.0}), NoDetections);

    // The grid form degrades to a flat zero surface instead of throwing.
    const LikelihoodGrid g =
        eval_grid(misses, array, make_grid(90.0, -95.0, -90.0, 5.0), CostKind::Baseline);
    for (double c : g.cost) CHECK(c == 0.0);
}

TEST_CASE("cost kind names are stable identifiers") {
    CHECK(cost_kind_name(CostKind::Full) == "full");
    CHECK(cost_kind_name(CostKind::Simplified) == "proposed");
    CHECK(cost_kind_name(CostKind::Baseline) == "baseline");
}
