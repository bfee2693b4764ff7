#include "doa/detection.hpp"

#include <cmath>

#include "doa/angles.hpp"
#include "doa/errors.hpp"

namespace doa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kMinLogNormalizer = -690.77552789821368;  // log(1e-300)

}  // namespace

double normal_cdf(double z) {
    if (!std::isfinite(z)) throw InvalidInput("normal_cdf: non-finite argument");
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_sf(double z) {
    if (!std::isfinite(z)) throw InvalidInput("normal_sf: non-finite argument");
    return 0.5 * std::erfc(z * kInvSqrt2);
}

double log_normal_sf(double z) {
    if (!std::isfinite(z)) throw InvalidInput("log_normal_sf: non-finite argument");
    // erfc stays normal (> 1e-300) out to z ~ 37; past 30 the asymptotic
    // series is already accurate to ~1e-12 relative, so switch there.
    if (z <= 30.0) return std::log(0.5 * std::erfc(z * kInvSqrt2));
    const double zi2 = 1.0 / (z * z);
    const double series = zi2 * (-1.0 + zi2 * (3.0 + zi2 * (-15.0 + zi2 * 105.0)));
    return -0.5 * z * z - std::log(z) - kLogSqrt2Pi + std::log1p(series);
}

double log_normal_cdf(double z) { return log_normal_sf(-z); }

double detection_prob_threshold(double mu_dbm, double gamma_dbm, double sigma_db) {
    if (!(sigma_db > 0.0)) throw InvalidInput("detection_prob_threshold: sigma must be positive");
    if (!std::isfinite(mu_dbm) || !std::isfinite(gamma_dbm))
        throw InvalidInput("detection_prob_threshold: non-finite argument");
    return normal_sf((gamma_dbm - mu_dbm) / sigma_db);
}

double detection_prob_total(double pc, double p_alpha) {
    if (!(pc >= 0.0 && pc <= 1.0)) throw InvalidInput("detection_prob_total: pc outside [0, 1]");
    if (!(p_alpha >= 0.0 && p_alpha <= 1.0))
        throw InvalidInput("detection_prob_total: p_alpha outside [0, 1]");
    return pc * p_alpha;
}

double truncated_normal_logpdf(double y, double mu, double sigma, double a, double b) {
    if (!(sigma > 0.0)) throw InvalidInput("truncated_normal_logpdf: sigma must be positive");
    if (!(a < b)) throw InvalidInput("truncated_normal_logpdf: need a < b");
    if (!std::isfinite(y) || !std::isfinite(mu))
        throw InvalidInput("truncated_normal_logpdf: non-finite y or mu");

    if (!(y > a && y < b)) return kLogZero;

    double log_z;
    const bool lo_open = std::isinf(a);
    const bool hi_open = std::isinf(b);
    if (lo_open && hi_open) {
        log_z = 0.0;
    } else if (lo_open) {
        log_z = log_normal_cdf((b - mu) / sigma);
    } else if (hi_open) {
        log_z = log_normal_sf((a - mu) / sigma);
    } else {
        const double za = (a - mu) / sigma;
        const double zb = (b - mu) / sigma;
        double mass;
        if (za >= 0.0)
            mass = normal_sf(za) - normal_sf(zb);
        else if (zb <= 0.0)
            mass = normal_sf(-zb) - normal_sf(-za);
        else
            mass = normal_cdf(zb) - normal_cdf(za);
        log_z = std::log(mass);
    }
    if (!(log_z >= kMinLogNormalizer))
        throw NormalizerUnderflow("truncated_normal_logpdf: truncation mass below 1e-300");

    const double r = (y - mu) / sigma;
    return -0.5 * r * r - std::log(sigma) - kLogSqrt2Pi - log_z;
}

Observation simulate_observation(const SourceState& state, const ArrayConfig& array, int sensor,
                                 Rng& rng) {
    if (sensor < 0 || static_cast<std::size_t>(sensor) >= array.size())
        throw InvalidInput("simulate_observation: sensor index out of range");
    if (!std::isfinite(state.psi_rad) || !std::isfinite(state.alpha_dbm))
        throw InvalidInput("simulate_observation: non-finite state");

    if (rng.bernoulli(1.0 - array.pc[static_cast<std::size_t>(sensor)]))
        return Observation::miss(sensor);

    const double mu =
        state.alpha_dbm + eval_pattern(array.patterns[static_cast<std::size_t>(sensor)],
                                       state.psi_rad);
    const double y = mu + array.sigma * rng.normal();
    if (y < array.gamma_dbm) return Observation::miss(sensor);
    return Observation::detection(sensor, y);
}

}  // namespace doa
