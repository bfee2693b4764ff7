#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "doa/estimator.hpp"
#include "doa/likelihood.hpp"

namespace doa {

/// Monte Carlo study setup. Sweeps require a pc shared by all sensors so a
/// single efficiency value labels each record.
struct ScenarioConfig {
    ArrayConfig array;
    GridSpec grid;                     // empty axes select default_grid()
    std::vector<double> psi_true_deg;  // empty selects 0..359 in 1 deg steps
    std::vector<double> alpha_dbm;     // source power levels
    int mc_runs = 50;
    int batch = 1;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct SweepRecord {
    double psi_true_deg = 0.0;
    double alpha_dbm = 0.0;
    double pc = 1.0;
    int batch = 1;
    int run = 0;
    CostKind method = CostKind::Simplified;
    double psi_hat_deg = 0.0;
    double alpha_hat_dbm = 0.0;
    double err_deg = 0.0;
    double err_alpha_db = 0.0;
    int n_missed = 0;
    bool degenerate = false;
};

/// Table-style summary over one sweep cell: RMSE per true angle over the
/// Monte Carlo runs, then mean and spread across angles.
struct SweepAggregate {
    double alpha_dbm = 0.0;
    double pc = 1.0;
    int batch = 1;
    CostKind method = CostKind::Simplified;
    double doa_rmse_mean_deg = 0.0;
    double doa_rmse_std_deg = 0.0;
    double alpha_rmse_mean_db = 0.0;
    double alpha_rmse_std_db = 0.0;
    double mean_missed = 0.0;  // missed sensors per scenario
};

struct SweepResult {
    std::string sweep;
    std::vector<SweepRecord> records;       // deterministic order, both methods
    std::vector<SweepAggregate> aggregates;
};

/// One record pair (miss-aware and detections-only) per
/// (level, true angle, run). The draw stream is keyed by (true angle,
/// level, run) only, so a cell repeated across sweeps reproduces the same
/// observations bit for bit.
SweepResult run_alpha_sweep(const ScenarioConfig& cfg);

/// Levels crossed with efficiency values.
SweepResult run_pc_sweep(const ScenarioConfig& cfg, std::span<const double> pc_values);

/// Levels crossed with batch sizes (several epochs merged into one
/// estimation window).
SweepResult run_batch_sweep(const ScenarioConfig& cfg, std::span<const int> batch_sizes);

}  // namespace doa
