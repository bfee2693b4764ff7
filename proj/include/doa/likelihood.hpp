#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "doa/detection.hpp"
#include "doa/pattern.hpp"

namespace doa {

enum class CostKind { Full, Simplified, Baseline };

std::string cost_kind_name(CostKind kind);

/// Search grid over bearing and source power. Both axes strictly increasing.
struct GridSpec {
    std::vector<double> psi_rad;
    std::vector<double> alpha_dbm;
};

/// Stock grid: psi over [0, 360) deg in 1 deg steps, alpha from -100 to
/// 0 dBm in 0.2 dBm steps.
GridSpec default_grid();
GridSpec make_grid(double psi_step_deg, double alpha_min_dbm, double alpha_max_dbm,
                   double alpha_step_dbm);

struct LikelihoodGrid {
    std::vector<double> psi_rad;
    std::vector<double> alpha_dbm;
    std::vector<double> cost;  // psi-major: cost[i * n_alpha + j]
    CostKind kind = CostKind::Simplified;

    std::size_t n_psi() const { return psi_rad.size(); }
    std::size_t n_alpha() const { return alpha_dbm.size(); }
    double at(std::size_t i, std::size_t j) const { return cost[i * alpha_dbm.size() + j]; }
};

/// Per-sensor pattern gains over a psi grid, clamped to the likelihood
/// dynamic range. Computed once and shared across alpha values,
/// observations and Monte Carlo tasks. Laid out psi-major so one grid row
/// reads a contiguous block of sensor gains.
struct GainTable {
    std::vector<double> psi_rad;
    std::size_t n_sensors = 0;
    std::vector<double> gain;  // [i_psi * n_sensors + m]

    double at(std::size_t sensor, std::size_t i_psi) const {
        return gain[i_psi * n_sensors + sensor];
    }
    const double* psi_row(std::size_t i_psi) const { return gain.data() + i_psi * n_sensors; }
};

GainTable precompute_gains(const ArrayConfig& array, const std::vector<double>& psi_rad);

/// Clamped per-sensor gains at a single bearing.
std::vector<double> sensor_gains(const ArrayConfig& array, double psi_rad);

/// Miss penalty f(z) = -log(1 - pc * Phi(z)), z = (mu - gamma)/sigma, as a
/// cubic-Hermite table over z in [-40, 70] with exact evaluation outside.
/// Grid search spends most of its time here; tables are cached per pc and
/// accurate to ~1e-13 against the direct form (unit-tested).
class MissTermTable {
public:
    static std::shared_ptr<const MissTermTable> get(double pc);

    double operator()(double z) const {
        if (z < kZLo || z >= kZHi) return exact(pc_, z);
        const double p = (z - kZLo) * kInvStep;
        const double ip = std::floor(p);
        const std::size_t i = static_cast<std::size_t>(ip);
        const double t = p - ip;
        const double v0 = value_[i], v1 = value_[i + 1];
        const double d0 = deriv_[i] * kStep, d1 = deriv_[i + 1] * kStep;
        const double t2 = t * t, t3 = t2 * t;
        return v0 * (2.0 * t3 - 3.0 * t2 + 1.0) + d0 * (t3 - 2.0 * t2 + t) +
               v1 * (3.0 * t2 - 2.0 * t3) + d1 * (t3 - t2);
    }

    static double exact(double pc, double z);
    static double exact_deriv(double pc, double z);

private:
    explicit MissTermTable(double pc);

    static constexpr double kZLo = -40.0;
    static constexpr double kZHi = 70.0;
    static constexpr double kStep = 1.0 / 1024.0;
    static constexpr double kInvStep = 1024.0;

    double pc_;
    std::vector<double> value_;
    std::vector<double> deriv_;
};

/// Shared core of the scalar costs and the grid search. Collapses the
/// observation set to per-sensor sufficient statistics at construction, so
/// batched observations cost the same per grid node as a single one; the
/// scalar and grid paths run the identical per-node arithmetic.
class CostEvaluator {
public:
    CostEvaluator(std::span<const Observation> obs, const ArrayConfig& array, CostKind kind);

    /// Costs over all alphas at one bearing, given that bearing's clamped
    /// per-sensor gains.
    void row_costs(const double* gains, std::span<const double> alphas, double* out) const;

    double cost_at(const double* gains, double alpha_dbm) const;

    std::size_t n_detected() const { return n_detected_; }
    std::size_t n_missed() const { return n_missed_; }
    CostKind kind() const { return kind_; }
    std::size_t n_sensors() const { return stats_.size(); }

private:
    struct SensorStats {
        double n_det = 0.0;
        double sum_y = 0.0;
        double sum_y2 = 0.0;
        double n_miss = 0.0;
    };

    CostKind kind_;
    double sigma_;
    double gamma_;
    double inv_sigma_;
    double inv_two_sigma2_;
    std::vector<SensorStats> stats_;
    std::vector<double> pc_;
    std::vector<double> log_pc_;  // full form only
    std::vector<std::shared_ptr<const MissTermTable>> miss_tables_;  // null when unused
    double det_const_ = 0.0;  // alpha-independent detected-term constant
    bool impossible_ = false;
    std::size_t n_detected_ = 0;
    std::size_t n_missed_ = 0;
};

/// Negative log-likelihood of the thresholded model (full form with the
/// truncation normalizer and detection probability kept separate).
/// State-independent constants are omitted identically in all cost kinds.
double nll_full(std::span<const Observation> obs, const ArrayConfig& array,
                const SourceState& state);

/// Algebraically reduced form: quadratic misfit for detections, a
/// log(1 - pc * Phi) penalty for misses. Differs from nll_full by a
/// state-independent constant.
double nll_simplified(std::span<const Observation> obs, const ArrayConfig& array,
                      const SourceState& state);

/// Detections-only least squares; misses contribute nothing. Throws
/// NoDetections when the observation set carries no information.
double nll_baseline(std::span<const Observation> obs, const ArrayConfig& array,
                    const SourceState& state);

/// Analytic d(nll_simplified)/d(alpha) at the given state.
double nll_simplified_dalpha(std::span<const Observation> obs, const ArrayConfig& array,
                             const SourceState& state);

LikelihoodGrid eval_grid(std::span<const Observation> obs, const ArrayConfig& array,
                         const GridSpec& grid, CostKind kind);

LikelihoodGrid eval_grid_with_gains(std::span<const Observation> obs, const ArrayConfig& array,
                                    const GainTable& gains, const std::vector<double>& alpha_dbm,
                                    CostKind kind);

}  // namespace doa
