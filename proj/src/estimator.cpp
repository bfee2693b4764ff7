#include "doa/estimator.hpp"

#include <cmath>
#include <limits>

#include "doa/errors.hpp"

namespace doa {

namespace {

constexpr double kFlatSpread = 1e-12;

struct ScanState {
    double best = std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t psi_index = 0;
    std::size_t alpha_index = 0;

    void take_row(const double* row, std::size_t n, std::size_t i_psi) {
        for (std::size_t j = 0; j < n; ++j) {
            const double c = row[j];
            if (c < best) {
                best = c;
                psi_index = i_psi;
                alpha_index = j;
            }
            if (c > worst) worst = c;
        }
    }
};

Estimate finish(const ScanState& s, const std::vector<double>& psi_rad,
                const std::vector<double>& alpha_dbm, CostKind kind) {
    Estimate e;
    e.kind = kind;
    e.psi_index = s.psi_index;
    e.alpha_index = s.alpha_index;
    e.psi_rad = psi_rad[s.psi_index];
    e.alpha_dbm = alpha_dbm[s.alpha_index];
    e.cost = s.best;
    e.degenerate = (s.worst - s.best) < kFlatSpread;
    return e;
}

}  // namespace

Estimate estimate_ml(const LikelihoodGrid& grid) {
    if (grid.cost.empty() || grid.cost.size() != grid.n_psi() * grid.n_alpha())
        throw InvalidInput("estimate_ml: malformed grid");
    ScanState s;
    const std::size_t n_alpha = grid.n_alpha();
    for (std::size_t i = 0; i < grid.n_psi(); ++i)
        s.take_row(grid.cost.data() + i * n_alpha, n_alpha, i);
    return finish(s, grid.psi_rad, grid.alpha_dbm, grid.kind);
}

Estimate estimate_proposed(std::span<const Observation> obs, const ArrayConfig& array,
                           const GridSpec& grid) {
    const GainTable gains = precompute_gains(array, grid.psi_rad);
    return estimate_scan(obs, array, gains, grid.alpha_dbm, CostKind::Simplified);
}

Estimate estimate_baseline(std::span<const Observation> obs, const ArrayConfig& array,
                           const GridSpec& grid) {
    const GainTable gains = precompute_gains(array, grid.psi_rad);
    return estimate_scan(obs, array, gains, grid.alpha_dbm, CostKind::Baseline);
}

Estimate estimate_scan(std::span<const Observation> obs, const ArrayConfig& array,
                       const GainTable& gains, const std::vector<double>& alpha_dbm,
                       CostKind kind) {
    return profile_scan(obs, array, gains, alpha_dbm, kind).estimate;
}

std::vector<ProfilePoint> profile_bearing(const LikelihoodGrid& grid) {
    if (grid.cost.empty() || grid.cost.size() != grid.n_psi() * grid.n_alpha())
        throw InvalidInput("profile_bearing: malformed grid");
    std::vector<ProfilePoint> profile(grid.n_psi());
    double global_min = std::numeric_limits<double>::infinity();
    const std::size_t n_alpha = grid.n_alpha();
    for (std::size_t i = 0; i < grid.n_psi(); ++i) {
        const double* row = grid.cost.data() + i * n_alpha;
        std::size_t jmin = 0;
        for (std::size_t j = 1; j < n_alpha; ++j)
            if (row[j] < row[jmin]) jmin = j;
        profile[i] = {grid.psi_rad[i], row[jmin], grid.alpha_dbm[jmin]};
        if (row[jmin] < global_min) global_min = row[jmin];
    }
    for (ProfilePoint& p : profile) p.cost -= global_min;
    return profile;
}

ProfileResult profile_scan(std::span<const Observation> obs, const ArrayConfig& array,
                           const GainTable& gains, const std::vector<double>& alpha_dbm,
                           CostKind kind) {
    if (gains.n_sensors != array.size())
        throw InvalidInput("gain table does not match the array");
    if (gains.psi_rad.empty() || alpha_dbm.empty())
        throw InvalidInput("profile_scan: empty grid axis");
    CostEvaluator ev(obs, array, kind);
    const std::size_t n_psi = gains.psi_rad.size();
    const std::size_t n_alpha = alpha_dbm.size();

    ProfileResult out;
    out.profile.resize(n_psi);

    if (kind == CostKind::Baseline && ev.n_detected() == 0) {
        for (std::size_t i = 0; i < n_psi; ++i)
            out.profile[i] = {gains.psi_rad[i], 0.0, alpha_dbm[0]};
        ScanState s;
        s.best = 0.0;
        s.worst = 0.0;
        out.estimate = finish(s, gains.psi_rad, alpha_dbm, kind);
        out.estimate.degenerate = true;
        return out;
    }

    ScanState s;
    std::vector<double> row(n_alpha);
    for (std::size_t i = 0; i < n_psi; ++i) {
        ev.row_costs(gains.psi_row(i), alpha_dbm, row.data());
        s.take_row(row.data(), n_alpha, i);
        std::size_t jmin = 0;
        for (std::size_t j = 1; j < n_alpha; ++j)
            if (row[j] < row[jmin]) jmin = j;
        out.profile[i] = {gains.psi_rad[i], row[jmin], alpha_dbm[jmin]};
    }
    for (ProfilePoint& p : out.profile) p.cost -= s.best;
    out.estimate = finish(s, gains.psi_rad, alpha_dbm, kind);
    if (kind == CostKind::Baseline && ev.n_detected() < 2) out.estimate.degenerate = true;
    return out;
}

}  // namespace doa
