#include "doa/pattern.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>

#include "doa/angles.hpp"
#include "doa/errors.hpp"

namespace doa {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

bool finite_complex(const std::complex<double>& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
}

}  // namespace

void validate_pattern(const SensorPattern& pattern) {
    if (pattern.order < 0) throw InvalidInput("pattern order must be non-negative");
    const std::size_t expect = 2 * static_cast<std::size_t>(pattern.order) + 1;
    if (pattern.coeffs.size() != expect)
        throw InvalidInput("pattern '" + pattern.sensor_id + "': expected " +
                           std::to_string(expect) + " coefficients, got " +
                           std::to_string(pattern.coeffs.size()));
    for (const auto& c : pattern.coeffs)
        if (!finite_complex(c))
            throw InvalidInput("pattern '" + pattern.sensor_id + "': non-finite coefficient");
    for (int k = 0; k <= pattern.order; ++k) {
        const std::complex<double> d = pattern.coeff(-k) - std::conj(pattern.coeff(k));
        if (std::abs(d) > 1e-9)
            throw InvalidInput("pattern '" + pattern.sensor_id +
                               "': conjugate symmetry violated at k=" + std::to_string(k));
    }
}

void validate_array(const ArrayConfig& array) {
    if (array.patterns.empty()) throw InvalidInput("array needs at least one sensor");
    if (!(array.sigma > 0.0)) throw InvalidInput("sigma must be positive");
    if (!std::isfinite(array.gamma_dbm)) throw InvalidInput("gamma must be finite");
    if (array.pc.size() != array.patterns.size())
        throw InvalidInput("pc must have one entry per sensor");
    for (double p : array.pc)
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("pc entries must lie in [0, 1]");
    for (const auto& p : array.patterns) validate_pattern(p);
}

ArrayConfig make_array(std::vector<SensorPattern> patterns, double sigma, double gamma_dbm,
                       double pc_shared) {
    ArrayConfig a;
    a.patterns = std::move(patterns);
    a.sigma = sigma;
    a.gamma_dbm = gamma_dbm;
    a.pc.assign(a.patterns.size(), pc_shared);
    validate_array(a);
    return a;
}

double eval_pattern(const SensorPattern& pattern, double psi_rad) {
    if (!std::isfinite(psi_rad)) throw InvalidInput("eval_pattern: non-finite angle");
    const int order = pattern.order;
    // sum c_k e^{ik psi} built by recurrence on e^{i psi}
    const std::complex<double> step(std::cos(psi_rad), std::sin(psi_rad));
    std::complex<double> phase(1.0, 0.0);
    std::complex<double> sum = pattern.coeff(0);
    for (int k = 1; k <= order; ++k) {
        phase *= step;
        sum += pattern.coeff(k) * phase + pattern.coeff(-k) * std::conj(phase);
    }
    if (!finite_complex(sum)) throw InvalidInput("eval_pattern: non-finite coefficients");
    if (std::abs(sum.imag()) > 1e-9)
        throw InvalidInput("eval_pattern: imaginary residual " + std::to_string(sum.imag()) +
                           " exceeds 1e-9; pattern lacks conjugate symmetry");
    return sum.real();
}

SensorPattern rotate_pattern(const SensorPattern& pattern, double theta_rad) {
    if (!std::isfinite(theta_rad)) throw InvalidInput("rotate_pattern: non-finite angle");
    SensorPattern out = pattern;
    for (int k = -pattern.order; k <= pattern.order; ++k) {
        const double a = -static_cast<double>(k) * theta_rad;
        out.coeff(k) = pattern.coeff(k) * std::complex<double>(std::cos(a), std::sin(a));
    }
    return out;
}

SensorPattern fit_pattern_wls(const std::vector<double>& angles_rad,
                              const std::vector<double>& means_db,
                              const std::vector<double>& variances_db2, int order,
                              std::string sensor_id) {
    if (order < 0) throw InvalidInput("fit_pattern_wls: order must be non-negative");
    const std::size_t n = angles_rad.size();
    if (means_db.size() != n || variances_db2.size() != n)
        throw InvalidInput("fit_pattern_wls: input arrays must have equal length");
    const int n_params = 2 * order + 1;
    if (n < static_cast<std::size_t>(n_params))
        throw RankDeficient("fit_pattern_wls: need at least " + std::to_string(n_params) +
                            " samples for order " + std::to_string(order));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(angles_rad[i]) || !std::isfinite(means_db[i]))
            throw InvalidInput("fit_pattern_wls: non-finite sample");
        if (!(variances_db2[i] > 0.0))
            throw InvalidInput("fit_pattern_wls: variances must be strictly positive");
    }

    // Rows scaled by sqrt(weight) so plain least squares solves the WLS problem.
    Eigen::MatrixXd design(n, n_params);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::sqrt(1.0 / variances_db2[i]);
        design(i, 0) = w;
        for (int k = 1; k <= order; ++k) {
            design(i, 2 * k - 1) = w * std::cos(k * angles_rad[i]);
            design(i, 2 * k) = w * std::sin(k * angles_rad[i]);
        }
        rhs(i) = w * means_db[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n_params)
        throw RankDeficient("fit_pattern_wls: rank " + std::to_string(qr.rank()) + " of " +
                            std::to_string(n_params) + " parameters (degenerate angle set)");
    Eigen::VectorXd sol = qr.solve(rhs);

    SensorPattern p;
    p.sensor_id = std::move(sensor_id);
    p.order = order;
    p.coeffs.assign(static_cast<std::size_t>(n_params), {0.0, 0.0});
    p.coeff(0) = {sol(0), 0.0};
    for (int k = 1; k <= order; ++k) {
        // a cos + b sin == 2 Re(c_k e^{ik psi}) with c_k = (a - ib)/2
        const std::complex<double> ck(0.5 * sol(2 * k - 1), -0.5 * sol(2 * k));
        p.coeff(k) = ck;
        p.coeff(-k) = std::conj(ck);
    }
    return p;
}

std::vector<SensorPattern> make_uca(const SensorPattern& base, int n_sensors) {
    if (n_sensors < 1) throw InvalidInput("make_uca: need at least one sensor");
    validate_pattern(base);
    std::vector<SensorPattern> out;
    out.reserve(static_cast<std::size_t>(n_sensors));
    for (int m = 0; m < n_sensors; ++m) {
        SensorPattern p = rotate_pattern(base, kTwoPi * m / n_sensors);
        p.sensor_id = base.sensor_id.empty() ? "s" + std::to_string(m)
                                             : base.sensor_id + "." + std::to_string(m);
        out.push_back(std::move(p));
    }
    return out;
}

SensorPattern synth_pattern(double main_gain_db, double side_level_db, double back_level_db,
                            int order) {
    if (order < 3) throw InvalidInput("synth_pattern: order must be at least 3");
    if (!(side_level_db < main_gain_db))
        throw InvalidInput("synth_pattern: side_level must be below main_gain");
    if (!std::isfinite(main_gain_db) || !std::isfinite(side_level_db) ||
        !std::isfinite(back_level_db))
        throw InvalidInput("synth_pattern: non-finite level");

    // Lobes summed in linear power. The side and back beams are kept broad
    // so the mixture never dips much below the back level between lobes;
    // narrow beams would carve deep inter-lobe nulls that the low-order fit
    // then reproduces.
    struct Lobe {
        double level_db, dir_rad, kappa;
    };
    const Lobe lobes[] = {
        {main_gain_db, 0.0, 5.0},
        {side_level_db, kPi / 2.0, 4.5},
        {side_level_db, -kPi / 2.0, 4.5},
        {back_level_db, kPi, 4.5},
    };

    const int n_samples = 720;
    std::vector<double> angles(n_samples), gains(n_samples), variances(n_samples, 1.0);
    for (int i = 0; i < n_samples; ++i) {
        const double psi = kTwoPi * i / n_samples;
        double power = 0.0;
        for (const Lobe& lobe : lobes)
            power += std::pow(10.0, lobe.level_db / 10.0) *
                     std::exp(lobe.kappa * (std::cos(psi - lobe.dir_rad) - 1.0));
        angles[i] = psi;
        gains[i] = 10.0 * std::log10(power);
    }
    SensorPattern p = fit_pattern_wls(angles, gains, variances, order);
    return p;
}

double clamp_gain_db(double gain_db) {
    if (gain_db < -120.0) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        return -120.0;
    }
    if (gain_db > 30.0) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        return 30.0;
    }
    return gain_db;
}

std::uint64_t gain_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

}  // namespace doa
