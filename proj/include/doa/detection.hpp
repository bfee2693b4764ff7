#pragma once

#include <optional>
#include <vector>

#include "doa/pattern.hpp"
#include "doa/rng.hpp"

namespace doa {

/// One sensor reading: a detected dBm value or an explicit miss.
struct Observation {
    int sensor = 0;
    std::optional<double> rssi_dbm;  // engaged iff detected

    bool detected() const { return rssi_dbm.has_value(); }

    static Observation detection(int sensor, double rssi_dbm) { return {sensor, rssi_dbm}; }
    static Observation miss(int sensor) { return {sensor, std::nullopt}; }
};

/// The unknowns: bearing (radians, wrapped to (-pi, pi]) and source power
/// at the array center (dBm).
struct SourceState {
    double psi_rad = 0.0;
    double alpha_dbm = 0.0;
};

/// A timestamped batch of observations, one estimation epoch.
struct Epoch {
    double t_s = 0.0;
    std::vector<Observation> obs;
};

/// Cost-domain sentinel for impossible hypotheses. Propagates through sums
/// without producing NaN and loses every comparison deterministically.
inline constexpr double kImpossibleCost = 1e30;
inline constexpr double kLogZero = -kImpossibleCost;

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline bool is_impossible_cost(double c) { return c >= kImpossibleCost; }

/// Standard normal CDF, abs error < 1e-12 over |z| <= 8.
double normal_cdf(double z);

/// Survival function 1 - Phi(z), computed in complementary form so the
/// upper tail keeps full precision.
double normal_sf(double z);

/// log(1 - Phi(z)). Uses erfc while it stays normal and an asymptotic tail
/// expansion beyond, so the value never saturates for large z.
double log_normal_sf(double z);

/// log Phi(z) == log_normal_sf(-z).
double log_normal_cdf(double z);

/// Threshold-based detection probability 1 - Phi((gamma - mu)/sigma).
double detection_prob_threshold(double mu_dbm, double gamma_dbm, double sigma_db);

/// Total detection probability: efficiency times threshold probability.
double detection_prob_total(double pc, double p_alpha);

/// Log-density of the normal truncated to (a, b); b may be +inf and a -inf.
/// Outside (a, b) the indicator gives the log-zero sentinel. Throws
/// NormalizerUnderflow when the truncation mass is below 1e-300.
double truncated_normal_logpdf(double y, double mu, double sigma, double a, double b);

/// Draws one observation: an efficiency coin (miss with probability 1-pc)
/// followed by y = alpha + h_m(psi) + e, thresholded at gamma. The coin is
/// drawn first; an efficiency failure discards the measurement entirely.
Observation simulate_observation(const SourceState& state, const ArrayConfig& array, int sensor,
                                 Rng& rng);

}  // namespace doa
