#include "doa/sim.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "doa/angles.hpp"
#include "doa/detection.hpp"
#include "doa/errors.hpp"
#include "doa/metrics.hpp"
#include "doa/parallel.hpp"

namespace doa {

namespace {

struct Cell {
    double alpha_dbm;
    double pc;
    int batch;
};

double shared_pc(const ArrayConfig& array) {
    if (array.pc.empty()) throw InvalidInput("sweep: array has no pc");
    for (double p : array.pc)
        if (p != array.pc.front())
            throw InvalidInput("sweep: sensors disagree on pc; sweeps need a shared value");
    return array.pc.front();
}

ScenarioConfig with_defaults(ScenarioConfig cfg) {
    if (cfg.grid.psi_rad.empty() || cfg.grid.alpha_dbm.empty()) cfg.grid = default_grid();
    if (cfg.psi_true_deg.empty()) {
        cfg.psi_true_deg.resize(360);
        for (int i = 0; i < 360; ++i) cfg.psi_true_deg[i] = static_cast<double>(i);
    }
    if (cfg.alpha_dbm.empty()) throw InvalidInput("sweep: no source power levels");
    if (cfg.mc_runs < 1) throw InvalidInput("sweep: mc_runs must be positive");
    if (cfg.batch < 1) throw InvalidInput("sweep: batch must be positive");
    return cfg;
}

SweepResult run_cells(const ScenarioConfig& cfg, std::string sweep_name,
                      const std::vector<Cell>& cells) {
    const std::size_t n_psi = cfg.psi_true_deg.size();
    const std::size_t n_runs = static_cast<std::size_t>(cfg.mc_runs);
    const std::size_t tasks_per_cell = n_psi * n_runs;
    const std::size_t n_tasks = cells.size() * tasks_per_cell;

    const GainTable gains = precompute_gains(cfg.array, cfg.grid.psi_rad);

    std::vector<ArrayConfig> cell_arrays(cells.size(), cfg.array);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].batch < 1) throw InvalidInput("sweep: batch must be positive");
        cell_arrays[c].pc.assign(cfg.array.size(), cells[c].pc);
    }

    SweepResult out;
    out.sweep = std::move(sweep_name);
    out.records.resize(n_tasks * 2);

    parallel_for(n_tasks, cfg.threads, [&](std::size_t task) {
        const std::size_t c = task / tasks_per_cell;
        const std::size_t rem = task % tasks_per_cell;
        const std::size_t ip = rem / n_runs;
        const std::size_t run = rem % n_runs;
        const Cell& cell = cells[c];
        const ArrayConfig& array = cell_arrays[c];

        const double psi_true = cfg.psi_true_deg[ip];
        const SourceState state{deg2rad(psi_true), cell.alpha_dbm};
        Rng rng = Rng::stream(cfg.seed, {std::bit_cast<std::uint64_t>(psi_true),
                                         std::bit_cast<std::uint64_t>(cell.alpha_dbm),
                                         static_cast<std::uint64_t>(run)});
        std::vector<Observation> obs;
        obs.reserve(array.size() * static_cast<std::size_t>(cell.batch));
        for (int b = 0; b < cell.batch; ++b)
            for (std::size_t m = 0; m < array.size(); ++m)
                obs.push_back(simulate_observation(state, array, static_cast<int>(m), rng));
        int n_missed = 0;
        for (const Observation& o : obs)
            if (!o.detected()) ++n_missed;

        const CostKind kinds[2] = {CostKind::Simplified, CostKind::Baseline};
        for (int v = 0; v < 2; ++v) {
            const Estimate est = estimate_scan(obs, array, gains, cfg.grid.alpha_dbm, kinds[v]);
            SweepRecord& r = out.records[task * 2 + static_cast<std::size_t>(v)];
            r.psi_true_deg = psi_true;
            r.alpha_dbm = cell.alpha_dbm;
            r.pc = cell.pc;
            r.batch = cell.batch;
            r.run = static_cast<int>(run);
            r.method = kinds[v];
            r.psi_hat_deg = rad2deg(est.psi_rad);
            r.alpha_hat_dbm = est.alpha_dbm;
            r.err_deg = circular_error_deg(r.psi_hat_deg, psi_true);
            r.err_alpha_db = est.alpha_dbm - cell.alpha_dbm;
            r.n_missed = n_missed;
            r.degenerate = est.degenerate;
        }
    });

    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (const CostKind kind : {CostKind::Simplified, CostKind::Baseline}) {
            std::vector<double> psi_rmse(n_psi), alpha_rmse(n_psi), errs(n_runs), aerrs(n_runs);
            double missed_sum = 0.0;
            for (std::size_t ip = 0; ip < n_psi; ++ip) {
                for (std::size_t run = 0; run < n_runs; ++run) {
                    const std::size_t task = c * tasks_per_cell + ip * n_runs + run;
                    const std::size_t slot =
                        task * 2 + (kind == CostKind::Baseline ? 1u : 0u);
                    errs[run] = out.records[slot].err_deg;
                    aerrs[run] = out.records[slot].err_alpha_db;
                    missed_sum += out.records[slot].n_missed;
                }
                psi_rmse[ip] = rmse(errs);
                alpha_rmse[ip] = rmse(aerrs);
            }
            SweepAggregate agg;
            agg.alpha_dbm = cells[c].alpha_dbm;
            agg.pc = cells[c].pc;
            agg.batch = cells[c].batch;
            agg.method = kind;
            const auto [pm, ps] = mean_std(psi_rmse);
            agg.doa_rmse_mean_deg = pm;
            agg.doa_rmse_std_deg = ps;
            const auto [am, as] = mean_std(alpha_rmse);
            agg.alpha_rmse_mean_db = am;
            agg.alpha_rmse_std_db = as;
            agg.mean_missed = missed_sum / static_cast<double>(tasks_per_cell);
            out.aggregates.push_back(agg);
        }
    }
    return out;
}

}  // namespace

SweepResult run_alpha_sweep(const ScenarioConfig& raw) {
    const ScenarioConfig cfg = with_defaults(raw);
    const double pc = shared_pc(cfg.array);
    std::vector<Cell> cells;
    for (double a : cfg.alpha_dbm) cells.push_back({a, pc, cfg.batch});
    return run_cells(cfg, "alpha", cells);
}

SweepResult run_pc_sweep(const ScenarioConfig& raw, std::span<const double> pc_values) {
    const ScenarioConfig cfg = with_defaults(raw);
    if (pc_values.empty()) throw InvalidInput("sweep: no pc values");
    std::vector<Cell> cells;
    for (double a : cfg.alpha_dbm)
        for (double pc : pc_values) {
            if (!(pc >= 0.0 && pc <= 1.0)) throw InvalidInput("sweep: pc outside [0, 1]");
            cells.push_back({a, pc, cfg.batch});
        }
    return run_cells(cfg, "pc", cells);
}

SweepResult run_batch_sweep(const ScenarioConfig& raw, std::span<const int> batch_sizes) {
    const ScenarioConfig cfg = with_defaults(raw);
    const double pc = shared_pc(cfg.array);
    if (batch_sizes.empty()) throw InvalidInput("sweep: no batch sizes");
    std::vector<Cell> cells;
    for (double a : cfg.alpha_dbm)
        for (int b : batch_sizes) cells.push_back({a, pc, b});
    return run_cells(cfg, "batch", cells);
}

}  // namespace doa
