#include "doa/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "doa/angles.hpp"
#include "doa/errors.hpp"

namespace doa {

namespace {

void validate_axis(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw InvalidInput(std::string("grid: empty ") + name + " axis");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!std::isfinite(axis[i]))
            throw InvalidInput(std::string("grid: non-finite ") + name + " value");
        if (i > 0 && !(axis[i] > axis[i - 1]))
            throw InvalidInput(std::string("grid: ") + name + " axis not strictly increasing");
    }
}

void validate_array_light(const ArrayConfig& array) {
    if (array.patterns.empty()) throw InvalidInput("array: no sensors");
    if (!(array.sigma > 0.0) || !std::isfinite(array.sigma))
        throw InvalidInput("array: sigma must be positive and finite");
    if (!std::isfinite(array.gamma_dbm)) throw InvalidInput("array: non-finite gamma");
    if (array.pc.size() != array.patterns.size())
        throw InvalidInput("array: pc size does not match sensor count");
    for (double p : array.pc)
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("array: pc outside [0, 1]");
}

}  // namespace

std::string cost_kind_name(CostKind kind) {
    switch (kind) {
        case CostKind::Full: return "full";
        case CostKind::Simplified: return "proposed";
        case CostKind::Baseline: return "baseline";
    }
    throw InvalidInput("cost_kind_name: unknown kind");
}

GridSpec default_grid() {
    GridSpec g;
    g.psi_rad.resize(360);
    for (int i = 0; i < 360; ++i) g.psi_rad[i] = deg2rad(static_cast<double>(i));
    g.alpha_dbm.resize(501);
    for (int j = 0; j < 501; ++j) g.alpha_dbm[j] = static_cast<double>(j - 500) / 5.0;
    return g;
}

GridSpec make_grid(double psi_step_deg, double alpha_min_dbm, double alpha_max_dbm,
                   double alpha_step_dbm) {
    if (!(psi_step_deg > 0.0) || psi_step_deg > 360.0)
        throw InvalidInput("make_grid: psi step must be in (0, 360]");
    if (!(alpha_step_dbm > 0.0)) throw InvalidInput("make_grid: alpha step must be positive");
    if (!(alpha_max_dbm >= alpha_min_dbm))
        throw InvalidInput("make_grid: alpha range is empty");
    GridSpec g;
    const int n_psi = static_cast<int>(std::lround(360.0 / psi_step_deg));
    if (n_psi < 1 || std::abs(n_psi * psi_step_deg - 360.0) > 1e-9)
        throw InvalidInput("make_grid: psi step must divide 360");
    g.psi_rad.resize(n_psi);
    for (int i = 0; i < n_psi; ++i) g.psi_rad[i] = deg2rad(i * psi_step_deg);
    const int n_alpha =
        static_cast<int>(std::floor((alpha_max_dbm - alpha_min_dbm) / alpha_step_dbm + 1e-9)) + 1;
    g.alpha_dbm.resize(n_alpha);
    for (int j = 0; j < n_alpha; ++j) g.alpha_dbm[j] = alpha_min_dbm + j * alpha_step_dbm;
    return g;
}

GainTable precompute_gains(const ArrayConfig& array, const std::vector<double>& psi_rad) {
    validate_array_light(array);
    validate_axis(psi_rad, "psi");
    GainTable t;
    t.psi_rad = psi_rad;
    t.n_sensors = array.size();
    t.gain.resize(psi_rad.size() * t.n_sensors);
    for (std::size_t i = 0; i < psi_rad.size(); ++i)
        for (std::size_t m = 0; m < t.n_sensors; ++m)
            t.gain[i * t.n_sensors + m] = clamp_gain_db(eval_pattern(array.patterns[m], psi_rad[i]));
    return t;
}

std::vector<double> sensor_gains(const ArrayConfig& array, double psi_rad) {
    validate_array_light(array);
    if (!std::isfinite(psi_rad)) throw InvalidInput("sensor_gains: non-finite bearing");
    std::vector<double> g(array.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        g[m] = clamp_gain_db(eval_pattern(array.patterns[m], psi_rad));
    return g;
}

double MissTermTable::exact(double pc, double z) {
    if (pc <= 0.0) return 0.0;
    if (pc >= 1.0) return -log_normal_sf(z);
    return -std::log1p(-pc * normal_cdf(z));
}

double MissTermTable::exact_deriv(double pc, double z) {
    if (pc <= 0.0) return 0.0;
    const double log_phi = -0.5 * z * z - kLogSqrt2Pi;
    if (pc >= 1.0) return std::exp(log_phi - log_normal_sf(z));
    const double denom = (1.0 - pc) + pc * normal_sf(z);
    return pc * std::exp(log_phi) / denom;
}

MissTermTable::MissTermTable(double pc) : pc_(pc) {
    const auto n = static_cast<std::size_t>(std::lround((kZHi - kZLo) * kInvStep)) + 1;
    value_.resize(n);
    deriv_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = kZLo + static_cast<double>(i) * kStep;
        value_[i] = exact(pc, z);
        deriv_[i] = exact_deriv(pc, z);
    }
}

std::shared_ptr<const MissTermTable> MissTermTable::get(double pc) {
    if (!(pc >= 0.0 && pc <= 1.0)) throw InvalidInput("miss term: pc outside [0, 1]");
    static std::mutex mu;
    static std::vector<std::pair<double, std::shared_ptr<const MissTermTable>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    for (const auto& [p, table] : cache)
        if (p == pc) return table;
    std::shared_ptr<const MissTermTable> table(new MissTermTable(pc));
    cache.emplace_back(pc, table);
    return table;
}

CostEvaluator::CostEvaluator(std::span<const Observation> obs, const ArrayConfig& array,
                             CostKind kind)
    : kind_(kind), sigma_(array.sigma), gamma_(array.gamma_dbm) {
    validate_array_light(array);
    inv_sigma_ = 1.0 / sigma_;
    inv_two_sigma2_ = 1.0 / (2.0 * sigma_ * sigma_);
    const std::size_t n = array.size();
    stats_.resize(n);
    pc_ = array.pc;
    for (const Observation& o : obs) {
        if (o.sensor < 0 || static_cast<std::size_t>(o.sensor) >= n)
            throw InvalidInput("observation: sensor index out of range");
        SensorStats& s = stats_[static_cast<std::size_t>(o.sensor)];
        if (o.detected()) {
            const double y = *o.rssi_dbm;
            if (!std::isfinite(y)) throw MalformedObservation("detected value is not finite");
            if (y < gamma_)
                throw MalformedObservation("detected value below the detection threshold");
            s.n_det += 1.0;
            s.sum_y += y;
            s.sum_y2 += y * y;
            ++n_detected_;
        } else {
            s.n_miss += 1.0;
            ++n_missed_;
        }
    }
    miss_tables_.assign(n, nullptr);
    if (kind_ == CostKind::Full) {
        log_pc_.assign(n, 0.0);
        det_const_ = static_cast<double>(n_detected_) * (std::log(sigma_) + kLogSqrt2Pi);
    }
    for (std::size_t m = 0; m < n; ++m) {
        const double pc = pc_[m];
        if (stats_[m].n_det > 0.0) {
            if (pc <= 0.0) {
                impossible_ = true;
            } else if (kind_ == CostKind::Simplified) {
                det_const_ += stats_[m].n_det * (-std::log(pc));
            } else if (kind_ == CostKind::Full) {
                log_pc_[m] = std::log(pc);
            }
        }
        if (stats_[m].n_miss > 0.0 && kind_ != CostKind::Baseline && pc > 0.0)
            miss_tables_[m] = MissTermTable::get(pc);
    }
}

void CostEvaluator::row_costs(const double* gains, std::span<const double> alphas,
                              double* out) const {
    const std::size_t n_alpha = alphas.size();
    if (impossible_) {
        std::fill(out, out + n_alpha, kImpossibleCost);
        return;
    }
    double qa = 0.0, qb = 0.0, qc = 0.0;
    for (std::size_t m = 0; m < stats_.size(); ++m) {
        const SensorStats& s = stats_[m];
        if (s.n_det == 0.0) continue;
        const double h = gains[m];
        qa += s.sum_y2 - 2.0 * s.sum_y * h + s.n_det * h * h;
        qb += 2.0 * (s.n_det * h - s.sum_y);
        qc += s.n_det;
    }
    for (std::size_t j = 0; j < n_alpha; ++j) {
        const double a = alphas[j];
        out[j] = (qa + a * (qb + a * qc)) * inv_two_sigma2_ + det_const_;
    }
    if (kind_ == CostKind::Full) {
        for (std::size_t m = 0; m < stats_.size(); ++m) {
            const SensorStats& s = stats_[m];
            const double off = gains[m] - gamma_;
            if (s.n_det > 0.0) {
                for (std::size_t j = 0; j < n_alpha; ++j) {
                    const double log_pa = log_normal_sf(-(alphas[j] + off) * inv_sigma_);
                    out[j] += s.n_det * (log_pa - (log_pc_[m] + log_pa));
                }
            }
            if (s.n_miss > 0.0 && pc_[m] > 0.0) {
                for (std::size_t j = 0; j < n_alpha; ++j) {
                    const double z = (alphas[j] + off) * inv_sigma_;
                    out[j] += s.n_miss * MissTermTable::exact(pc_[m], z);
                }
            }
        }
        return;
    }
    for (std::size_t m = 0; m < stats_.size(); ++m) {
        const MissTermTable* table = miss_tables_[m].get();
        if (table == nullptr) continue;
        const double n_miss = stats_[m].n_miss;
        const double off = gains[m] - gamma_;
        for (std::size_t j = 0; j < n_alpha; ++j) {
            const double z = (alphas[j] + off) * inv_sigma_;
            out[j] += n_miss * (*table)(z);
        }
    }
}

double CostEvaluator::cost_at(const double* gains, double alpha_dbm) const {
    double out = 0.0;
    row_costs(gains, std::span<const double>(&alpha_dbm, 1), &out);
    return out;
}

namespace {

double scalar_cost(std::span<const Observation> obs, const ArrayConfig& array,
                   const SourceState& state, CostKind kind) {
    if (!std::isfinite(state.psi_rad) || !std::isfinite(state.alpha_dbm))
        throw InvalidInput("state: non-finite bearing or power");
    CostEvaluator ev(obs, array, kind);
    if (kind == CostKind::Baseline && ev.n_detected() == 0)
        throw NoDetections("baseline cost needs at least one detection");
    const std::vector<double> g = sensor_gains(array, state.psi_rad);
    return ev.cost_at(g.data(), state.alpha_dbm);
}

}  // namespace

double nll_full(std::span<const Observation> obs, const ArrayConfig& array,
                const SourceState& state) {
    return scalar_cost(obs, array, state, CostKind::Full);
}

double nll_simplified(std::span<const Observation> obs, const ArrayConfig& array,
                      const SourceState& state) {
    return scalar_cost(obs, array, state, CostKind::Simplified);
}

double nll_baseline(std::span<const Observation> obs, const ArrayConfig& array,
                    const SourceState& state) {
    return scalar_cost(obs, array, state, CostKind::Baseline);
}

double nll_simplified_dalpha(std::span<const Observation> obs, const ArrayConfig& array,
                             const SourceState& state) {
    if (!std::isfinite(state.psi_rad) || !std::isfinite(state.alpha_dbm))
        throw InvalidInput("state: non-finite bearing or power");
    validate_array_light(array);
    const std::vector<double> g = sensor_gains(array, state.psi_rad);
    const double sigma = array.sigma;
    const double inv_sigma2 = 1.0 / (sigma * sigma);
    double d = 0.0;
    for (const Observation& o : obs) {
        if (o.sensor < 0 || static_cast<std::size_t>(o.sensor) >= array.size())
            throw InvalidInput("observation: sensor index out of range");
        const std::size_t m = static_cast<std::size_t>(o.sensor);
        const double mu = state.alpha_dbm + g[m];
        if (o.detected()) {
            d -= (*o.rssi_dbm - mu) * inv_sigma2;
        } else {
            const double z = (mu - array.gamma_dbm) / sigma;
            d += MissTermTable::exact_deriv(array.pc[m], z) / sigma;
        }
    }
    return d;
}

LikelihoodGrid eval_grid(std::span<const Observation> obs, const ArrayConfig& array,
                         const GridSpec& grid, CostKind kind) {
    const GainTable gains = precompute_gains(array, grid.psi_rad);
    return eval_grid_with_gains(obs, array, gains, grid.alpha_dbm, kind);
}

LikelihoodGrid eval_grid_with_gains(std::span<const Observation> obs, const ArrayConfig& array,
                                    const GainTable& gains, const std::vector<double>& alpha_dbm,
                                    CostKind kind) {
    if (gains.n_sensors != array.size())
        throw InvalidInput("gain table does not match the array");
    validate_axis(gains.psi_rad, "psi");
    validate_axis(alpha_dbm, "alpha");
    CostEvaluator ev(obs, array, kind);
    LikelihoodGrid out;
    out.psi_rad = gains.psi_rad;
    out.alpha_dbm = alpha_dbm;
    out.kind = kind;
    out.cost.resize(gains.psi_rad.size() * alpha_dbm.size());
    if (kind == CostKind::Baseline && ev.n_detected() == 0) {
        std::fill(out.cost.begin(), out.cost.end(), 0.0);
        return out;
    }
    for (std::size_t i = 0; i < gains.psi_rad.size(); ++i)
        ev.row_costs(gains.psi_row(i), alpha_dbm, out.cost.data() + i * alpha_dbm.size());
    return out;
}

}  // namespace doa
