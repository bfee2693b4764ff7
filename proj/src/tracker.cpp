#include "doa/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "doa/angles.hpp"
#include "doa/errors.hpp"

namespace doa {

namespace {

void validate_filter(const FilterConfig& cfg) {
    if (cfg.n_particles < 2) throw InvalidInput("filter: need at least two particles");
    if (!(cfg.process_noise_q > 0.0)) throw InvalidInput("filter: process noise must be positive");
    if (!(cfg.resample_threshold > 0.0 && cfg.resample_threshold <= 1.0))
        throw InvalidInput("filter: resample threshold must be in (0, 1]");
    if (!(cfg.init_rate_std_rad_s >= 0.0)) throw InvalidInput("filter: negative rate std");
    if (!(cfg.cost_clamp > 0.0)) throw InvalidInput("filter: cost clamp must be positive");
}

void init_uniform(PfState& state, const FilterConfig& cfg, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(cfg.n_particles);
    state.particles.resize(n);
    state.weights.assign(n, 1.0 / static_cast<double>(n));
    for (Particle& p : state.particles) {
        p.psi_rad = rng.uniform(0.0, kTwoPi);
        p.rate_rad_s = rng.normal(0.0, cfg.init_rate_std_rad_s);
    }
}

}  // namespace

PfState pf_init(const FilterConfig& cfg, Rng& rng) {
    validate_filter(cfg);
    PfState state;
    init_uniform(state, cfg, rng);
    return state;
}

PfState pf_init_point(const FilterConfig& cfg, double psi_rad, Rng& rng) {
    validate_filter(cfg);
    if (!std::isfinite(psi_rad)) throw InvalidInput("filter: non-finite initial bearing");
    PfState state;
    const std::size_t n = static_cast<std::size_t>(cfg.n_particles);
    state.particles.resize(n);
    state.weights.assign(n, 1.0 / static_cast<double>(n));
    for (Particle& p : state.particles) {
        p.psi_rad = wrap_two_pi(psi_rad);
        p.rate_rad_s = rng.normal(0.0, cfg.init_rate_std_rad_s);
    }
    return state;
}

void pf_predict(PfState& state, double dt_s, double q, Rng& rng) {
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw InvalidInput("predict: dt must be positive");
    if (!(q >= 0.0)) throw InvalidInput("predict: process noise must not be negative");
    const double l11 = std::sqrt(q * dt_s * dt_s * dt_s / 3.0);
    const double l21 = 0.5 * std::sqrt(3.0 * q * dt_s);
    const double l22 = 0.5 * std::sqrt(q * dt_s);
    for (Particle& p : state.particles) {
        const double u1 = rng.normal();
        const double u2 = rng.normal();
        p.psi_rad = wrap_two_pi(p.psi_rad + p.rate_rad_s * dt_s + l11 * u1);
        p.rate_rad_s += l21 * u1 + l22 * u2;
    }
}

double interp_profile_cost(std::span<const ProfilePoint> profile, double psi_rad) {
    if (profile.size() < 2) throw InvalidInput("profile: need at least two points");
    const double psi = wrap_two_pi(psi_rad);
    const std::size_t n = profile.size();
    // Upper neighbor: first point with psi_rad > psi (wraps to point 0).
    std::size_t hi = 0;
    {
        std::size_t lo = 0, count = n;
        while (count > 0) {
            std::size_t step = count / 2;
            std::size_t mid = lo + step;
            if (profile[mid].psi_rad <= psi) {
                lo = mid + 1;
                count -= step + 1;
            } else {
                count = step;
            }
        }
        hi = lo;  // in [0, n]; 0 means psi below first point (cannot happen for psi >= 0 grids)
    }
    const std::size_t i1 = hi % n;
    const std::size_t i0 = (i1 + n - 1) % n;
    double span_width = profile[i1].psi_rad - profile[i0].psi_rad;
    double offset = psi - profile[i0].psi_rad;
    if (span_width <= 0.0) span_width += kTwoPi;
    if (offset < 0.0) offset += kTwoPi;
    const double t = offset / span_width;
    return profile[i0].cost + t * (profile[i1].cost - profile[i0].cost);
}

bool pf_update(PfState& state, std::span<const ProfilePoint> profile, double cost_clamp,
               double reinit_rate_std_rad_s, Rng& rng) {
    if (!(cost_clamp > 0.0)) throw InvalidInput("update: cost clamp must be positive");
    bool all_clamped = true;
    double sum = 0.0;
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
        double c = interp_profile_cost(profile, state.particles[i].psi_rad);
        if (c < cost_clamp)
            all_clamped = false;
        else
            c = cost_clamp;
        state.weights[i] *= std::exp(-c);
        sum += state.weights[i];
    }
    if (all_clamped || !(sum > 0.0)) {
        for (Particle& p : state.particles) {
            p.psi_rad = rng.uniform(0.0, kTwoPi);
            p.rate_rad_s = rng.normal(0.0, reinit_rate_std_rad_s);
        }
        std::fill(state.weights.begin(), state.weights.end(),
                  1.0 / static_cast<double>(state.weights.size()));
        return true;
    }
    const double inv = 1.0 / sum;
    for (double& w : state.weights) w *= inv;
    return false;
}

double pf_ess(std::span<const double> weights) {
    double s2 = 0.0;
    for (double w : weights) s2 += w * w;
    if (s2 <= 0.0) return 0.0;
    return 1.0 / s2;
}

void pf_resample(PfState& state, Rng& rng) {
    const std::size_t n = state.particles.size();
    if (n == 0) throw InvalidInput("resample: empty state");
    std::vector<Particle> next(n);
    const double u0 = rng.uniform() / static_cast<double>(n);
    double cum = state.weights[0];
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
        while (cum < u && k + 1 < n) {
            ++k;
            cum += state.weights[k];
        }
        next[i] = state.particles[k];
    }
    state.particles = std::move(next);
    std::fill(state.weights.begin(), state.weights.end(), 1.0 / static_cast<double>(n));
}

std::optional<double> pf_estimate(const PfState& state) {
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
        c += state.weights[i] * std::cos(state.particles[i].psi_rad);
        s += state.weights[i] * std::sin(state.particles[i].psi_rad);
    }
    if (std::sqrt(c * c + s * s) < 1e-9) return std::nullopt;
    return wrap_two_pi(std::atan2(s, c));
}

std::vector<TrackPoint> track_sequence(std::span<const Epoch> epochs, const ArrayConfig& array,
                                       const GridSpec& grid, const FilterConfig& cfg,
                                       CostKind kind, std::uint64_t seed) {
    validate_filter(cfg);
    for (std::size_t k = 1; k < epochs.size(); ++k)
        if (!(epochs[k].t_s > epochs[k - 1].t_s))
            throw InvalidInput("track: epoch timestamps must be strictly increasing");

    const GainTable gains = precompute_gains(array, grid.psi_rad);
    Rng rng = Rng::stream(seed, {0x70667472ULL});
    PfState state = cfg.init_psi_rad ? pf_init_point(cfg, *cfg.init_psi_rad, rng)
                                     : pf_init(cfg, rng);

    std::vector<TrackPoint> track;
    track.reserve(epochs.size());
    double psi_last = cfg.init_psi_rad ? wrap_two_pi(*cfg.init_psi_rad) : 0.0;
    for (std::size_t k = 0; k < epochs.size(); ++k) {
        if (k > 0) pf_predict(state, epochs[k].t_s - epochs[k - 1].t_s, cfg.process_noise_q, rng);
        const ProfileResult pr =
            profile_scan(epochs[k].obs, array, gains, grid.alpha_dbm, kind);
        const bool lost =
            pf_update(state, pr.profile, cfg.cost_clamp, cfg.init_rate_std_rad_s, rng);
        const std::optional<double> mean = pf_estimate(state);
        if (mean) psi_last = *mean;
        if (!lost && pf_ess(state.weights) <
                         cfg.resample_threshold * static_cast<double>(state.weights.size()))
            pf_resample(state, rng);

        TrackPoint pt;
        pt.t_s = epochs[k].t_s;
        pt.psi_pf_rad = psi_last;
        pt.psi_ml_rad = pr.estimate.psi_rad;
        pt.alpha_ml_dbm = pr.estimate.alpha_dbm;
        pt.cost_ml = pr.estimate.cost;
        pt.track_loss = lost;
        pt.degenerate = pr.estimate.degenerate;
        for (const Observation& o : epochs[k].obs)
            if (!o.detected()) ++pt.n_missed;
        track.push_back(pt);
    }
    return track;
}

}  // namespace doa
