#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "doa/detection.hpp"
#include "doa/estimator.hpp"
#include "doa/tracker.hpp"

namespace doa {

/// Receivers report nothing below this power; thresholds below it cannot be
/// applied in post-processing.
inline constexpr double kHardwareFloorDbm = -95.0;

struct RssiRecord {
    double t_s = 0.0;
    std::string antenna_id;
    int channel = 0;
    double rssi_dbm = 0.0;
};

struct RssiLog {
    std::vector<RssiRecord> records;  // non-decreasing timestamps
};

/// Columns: timestamp_s,antenna_id,channel,rssi_dbm. Channels are the BLE
/// advertising set {37, 38, 39}. Errors carry the line number.
RssiLog parse_rssi_log(std::istream& in);
RssiLog load_rssi_log(const std::string& path);

/// Sorted unique "antenna:channel" keys present in the log. One antenna
/// heard on one channel acts as one directional sensor.
std::vector<std::string> sensor_keys(const RssiLog& log);

std::string make_sensor_key(const std::string& antenna_id, int channel);

struct GroundTruthPoint {
    double t_s = 0.0;
    double bearing_deg = 0.0;
    double distance_m = 0.0;
};

/// Columns: timestamp_s,bearing_deg,distance_m. Timestamps strictly
/// increasing.
std::vector<GroundTruthPoint> parse_ground_truth(std::istream& in);
std::vector<GroundTruthPoint> load_ground_truth(const std::string& path);

/// Circular-linear interpolation of the reference bearing; clamps to the
/// end values outside the covered span.
double interp_bearing_deg(std::span<const GroundTruthPoint> truth, double t_s);

/// Groups packets into fixed windows starting at the first record. Every
/// packet below gamma becomes an explicit miss, and each sensor is padded
/// with misses up to round(window * rate) expected packets. gamma must not
/// be below the hardware floor. Records with keys outside sensor_keys are
/// rejected; the observation's sensor index is the key's position.
std::vector<Epoch> batch_observations(const RssiLog& log,
                                      std::span<const std::string> sensor_keys, double gamma_dbm,
                                      double window_s, double expected_rate_hz);

struct PcEstimate {
    double pc = 1.0;
    std::int64_t received = 0;
    std::int64_t expected = 0;
    bool estimated = false;  // false when no window qualified
};

/// Per-sensor efficiency from windows where the predicted mean power sits
/// at least 4 sigma above gamma, so threshold losses are negligible and
/// (received / expected) isolates the efficiency.
std::vector<PcEstimate> estimate_pc(
    const RssiLog& log, std::span<const std::string> sensor_keys, double window_s,
    double expected_rate_hz,
    const std::function<double(std::size_t sensor, double t_s)>& predicted_mu_dbm,
    double gamma_dbm, double sigma_db);

struct CellStats {
    double mean_dbm = 0.0;
    double var_db2 = 0.0;
    std::int64_t n = 0;
};

struct SigmaEstimate {
    double sigma_db = 0.0;
    std::size_t cells_used = 0;
    bool degenerate = false;
};

/// Pooled within-cell standard deviation. Cells whose mean lies within
/// 2 * sigma_prior of gamma are excluded (their spread is truncation-bitten),
/// as are cells with fewer than two samples. Falls back to the prior,
/// flagged degenerate, when nothing usable remains.
SigmaEstimate estimate_sigma(std::span<const CellStats> cells, double gamma_dbm,
                             double sigma_prior_db);

/// Per-sensor sample mean/variance of RSSI binned by reference bearing.
/// cells[sensor * n_bins + bin]; empty bins have n = 0.
std::vector<CellStats> rssi_cells(const RssiLog& log, std::span<const std::string> sensor_keys,
                                  std::span<const GroundTruthPoint> truth, double bin_deg);

struct PdTimeline {
    std::vector<double> t_s;
    std::vector<std::vector<double>> pd;  // [epoch][sensor]
};

/// Model-predicted detection probability per sensor along the reference
/// trajectory, using the tracked power estimate.
PdTimeline predicted_pd_timeline(std::span<const double> t_s,
                                 std::span<const double> alpha_hat_dbm,
                                 std::span<const GroundTruthPoint> truth,
                                 const ArrayConfig& array);

/// Observed detection fraction per sensor per window: packets at or above
/// gamma over the expected count.
PdTimeline measured_pd_timeline(const RssiLog& log, std::span<const std::string> sensor_keys,
                                double gamma_dbm, double window_s, double expected_rate_hz);

struct ThresholdSweepRow {
    double gamma_dbm = 0.0;
    CostKind method = CostKind::Simplified;
    double rmse_mean_deg = 0.0;
    double rmse_lo_deg = 0.0;  // 95% interval over seeds
    double rmse_hi_deg = 0.0;
    double pct_missed = 0.0;   // pooled missed fraction at this threshold, percent
    int n_seeds = 0;
};

/// Re-batches the log at each analysis threshold, tracks with both costs
/// over n_seeds filter seeds, and reports bearing RMSE against the
/// reference trajectory.
std::vector<ThresholdSweepRow> threshold_sweep_eval(
    const RssiLog& log, std::span<const GroundTruthPoint> truth, const ArrayConfig& array,
    std::span<const double> gammas_dbm, const GridSpec& grid, const FilterConfig& filter,
    double window_s, double expected_rate_hz, int n_seeds, std::uint64_t seed,
    unsigned threads);

}  // namespace doa
