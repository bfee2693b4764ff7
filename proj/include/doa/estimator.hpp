#pragma once

#include <span>
#include <vector>

#include "doa/likelihood.hpp"

namespace doa {

struct Estimate {
    double psi_rad = 0.0;
    double alpha_dbm = 0.0;
    double cost = 0.0;
    CostKind kind = CostKind::Simplified;
    bool degenerate = false;
    std::size_t psi_index = 0;
    std::size_t alpha_index = 0;
};

/// Joint argmin over a materialized cost grid. Ties break to the smallest
/// psi index, then the smallest alpha index. A surface whose total spread
/// falls below 1e-12 carries no preference and is flagged degenerate.
Estimate estimate_ml(const LikelihoodGrid& grid);

/// Grid-search estimate with the miss-aware cost.
Estimate estimate_proposed(std::span<const Observation> obs, const ArrayConfig& array,
                           const GridSpec& grid);

/// Grid-search estimate with the detections-only cost. Degenerate whenever
/// fewer than two detections constrain the fit.
Estimate estimate_baseline(std::span<const Observation> obs, const ArrayConfig& array,
                           const GridSpec& grid);

/// Fused scan over a precomputed gain table: same result as eval_grid_with_gains
/// followed by estimate_ml (plus the baseline detection-count rule), without
/// materializing the cost grid.
Estimate estimate_scan(std::span<const Observation> obs, const ArrayConfig& array,
                       const GainTable& gains, const std::vector<double>& alpha_dbm,
                       CostKind kind);

struct ProfilePoint {
    double psi_rad = 0.0;
    double cost = 0.0;       // shifted so the profile minimum is zero
    double alpha_dbm = 0.0;  // per-psi argmin over alpha
};

/// Bearing profile: per-psi minimum over alpha, shifted to a zero minimum.
std::vector<ProfilePoint> profile_bearing(const LikelihoodGrid& grid);

struct ProfileResult {
    std::vector<ProfilePoint> profile;
    Estimate estimate;
};

/// Fused profile + argmin scan; matches profile_bearing/estimate_ml on the
/// materialized grid node for node.
ProfileResult profile_scan(std::span<const Observation> obs, const ArrayConfig& array,
                           const GainTable& gains, const std::vector<double>& alpha_dbm,
                           CostKind kind);

}  // namespace doa
