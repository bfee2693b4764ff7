#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "doa/detection.hpp"
#include "doa/estimator.hpp"
#include "doa/field_data.hpp"
#include "doa/pattern.hpp"
#include "doa/sim.hpp"
#include "doa/tracker.hpp"

namespace doa {

/// Fourier coefficients, one row per (sensor, harmonic):
/// sensor_id,k,re,im. Loading validates completeness (-K..K per sensor)
/// and conjugate symmetry.
void write_patterns_csv(std::ostream& os, std::span<const SensorPattern> patterns);
std::vector<SensorPattern> load_patterns_csv(std::istream& in);
std::vector<SensorPattern> load_patterns_file(const std::string& path);
void write_patterns_file(const std::string& path, std::span<const SensorPattern> patterns);

struct CalibrationRow {
    std::string sensor_id;
    double angle_deg = 0.0;
    double mean_dbm = 0.0;
    double var_db2 = 0.0;
    long long n_samples = 0;
};

/// sensor_id,angle_deg,mean_dbm,var_db2,n_samples
void write_calibration_csv(std::ostream& os, std::span<const CalibrationRow> rows);
std::vector<CalibrationRow> load_calibration_csv(std::istream& in);
std::vector<CalibrationRow> load_calibration_file(const std::string& path);

/// epoch_id,sensor_id,detected,rssi_dbm (rssi empty on a miss). Epoch ids
/// are the epoch index; timestamps are not part of this schema.
void write_observations_csv(std::ostream& os, std::span<const Epoch> epochs,
                            std::span<const std::string> sensor_ids);
std::vector<Epoch> load_observations_csv(std::istream& in,
                                         std::span<const std::string> sensor_ids,
                                         double epoch_dt_s = 1.0);
std::vector<Epoch> load_observations_file(const std::string& path,
                                          std::span<const std::string> sensor_ids,
                                          double epoch_dt_s = 1.0);
void write_observations_file(const std::string& path, std::span<const Epoch> epochs,
                             std::span<const std::string> sensor_ids);

/// psi_deg,alpha_dbm,cost (psi-major)
void write_grid_csv(std::ostream& os, const LikelihoodGrid& grid);

/// psi_deg,min_cost_over_alpha,argmin_alpha_dbm
void write_profile_csv(std::ostream& os, std::span<const ProfilePoint> profile);

struct EstimateRow {
    long long epoch_id = 0;
    Estimate estimate;
};

/// epoch_id,method,psi_deg,alpha_dbm,cost,degenerate
void write_estimates_csv(std::ostream& os, std::span<const EstimateRow> rows);

/// timestamp,psi_pf_deg,psi_ml_deg,alpha_hat_dbm,n_missed,track_loss
void write_track_csv(std::ostream& os, std::span<const TrackPoint> track);

/// sweep,psi_true_deg,alpha_dbm,pc,batch,run,method,psi_hat_deg,
/// alpha_hat_dbm,err_deg,err_alpha_db,n_missed,degenerate
void write_sweep_records_csv(std::ostream& os, const SweepResult& result);

/// sweep,alpha_dbm,pc,batch,method,doa_rmse_mean_deg,doa_rmse_std_deg,
/// alpha_rmse_mean_db,alpha_rmse_std_db,mean_missed
void write_sweep_aggregates_csv(std::ostream& os, const SweepResult& result);

/// gamma_dbm,method,rmse_mean_deg,rmse_lo_deg,rmse_hi_deg,pct_missed,n_seeds
void write_threshold_sweep_csv(std::ostream& os, std::span<const ThresholdSweepRow> rows);

/// timestamp_s followed by one probability column per sensor key.
void write_pd_timeline_csv(std::ostream& os, const PdTimeline& timeline,
                           std::span<const std::string> sensor_keys);

}  // namespace doa
