#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "doa/estimator.hpp"
#include "doa/rng.hpp"

namespace doa {

/// Constant-velocity bearing particle: angle and turn rate.
struct Particle {
    double psi_rad = 0.0;
    double rate_rad_s = 0.0;
};

struct FilterConfig {
    int n_particles = 2000;
    /// White turn-acceleration intensity ((rad/s^2)^2). Default corresponds
    /// to 5 deg/s^2.
    double process_noise_q = 0.00761543549466122939;
    double resample_threshold = 0.5;  // resample when ESS/n falls below
    double init_rate_std_rad_s = 0.08726646259971647;  // 5 deg/s
    double cost_clamp = 50.0;
    std::optional<double> init_psi_rad;  // point prior instead of uniform
};

struct PfState {
    std::vector<Particle> particles;
    std::vector<double> weights;  // normalized
};

/// Uniform bearing prior over [0, 2*pi), Gaussian rate prior.
PfState pf_init(const FilterConfig& cfg, Rng& rng);

/// Point bearing prior with the same rate prior.
PfState pf_init_point(const FilterConfig& cfg, double psi_rad, Rng& rng);

/// Constant-velocity propagation over dt with exact discretized process
/// noise (white acceleration of intensity q). Bearings stay wrapped to
/// [0, 2*pi).
void pf_predict(PfState& state, double dt_s, double q, Rng& rng);

/// Multiplies weights by exp(-min(cost, clamp)) with the profiled cost
/// interpolated circularly at each particle bearing, then renormalizes.
/// When every particle sits in the clamped region the track is lost: the
/// state reinitializes uniformly (rates ~ N(0, reinit_rate_std)) and the
/// call returns true.
bool pf_update(PfState& state, std::span<const ProfilePoint> profile, double cost_clamp,
               double reinit_rate_std_rad_s, Rng& rng);

double pf_ess(std::span<const double> weights);

/// Systematic resampling; weights reset to 1/n.
void pf_resample(PfState& state, Rng& rng);

/// Weighted circular mean of the particle bearings, in [0, 2*pi).
/// Empty when the resultant length vanishes (no preferred direction).
std::optional<double> pf_estimate(const PfState& state);

/// Circular linear interpolation of a bearing profile (points ascending in
/// [0, 2*pi), wrap-around between the last and first point).
double interp_profile_cost(std::span<const ProfilePoint> profile, double psi_rad);

struct TrackPoint {
    double t_s = 0.0;
    double psi_pf_rad = 0.0;  // carried forward when the filter mean is undefined
    double psi_ml_rad = 0.0;
    double alpha_ml_dbm = 0.0;
    double cost_ml = 0.0;
    int n_missed = 0;
    bool track_loss = false;
    bool degenerate = false;
};

/// Runs the filter over timestamped epochs: predict to the epoch time,
/// grid-search the epoch batch, update from the bearing profile, resample
/// below the ESS threshold. Each point also carries the epoch's own
/// grid-search estimate. Identical seeds give identical tracks.
std::vector<TrackPoint> track_sequence(std::span<const Epoch> epochs, const ArrayConfig& array,
                                       const GridSpec& grid, const FilterConfig& cfg,
                                       CostKind kind, std::uint64_t seed);

}  // namespace doa
