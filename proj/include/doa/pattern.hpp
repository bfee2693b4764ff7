#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace doa {

/// Directional sensitivity pattern of one sensor, stored as complex Fourier
/// coefficients c_k, k = -K..K, of the gain in dB. Conjugate symmetry
/// (c_{-k} == conj(c_k)) keeps the evaluated gain real.
struct SensorPattern {
    std::string sensor_id;
    int order = 0;                             // harmonic count K
    std::vector<std::complex<double>> coeffs;  // c_k at index k + order

    std::complex<double> coeff(int k) const { return coeffs[static_cast<std::size_t>(k + order)]; }
    std::complex<double>& coeff(int k) { return coeffs[static_cast<std::size_t>(k + order)]; }
};

/// Sensor array: ordered patterns plus the shared noise level, detection
/// threshold and per-sensor detection efficiency. Immutable after
/// construction; safe to share across threads.
struct ArrayConfig {
    std::vector<SensorPattern> patterns;
    double sigma = 2.0;        // measurement-noise std dev, dB
    double gamma_dbm = -95.0;  // detection threshold
    std::vector<double> pc;    // detection efficiency per sensor, in [0, 1]

    std::size_t size() const { return patterns.size(); }
};

/// Throws InvalidInput unless coefficients are finite, sized 2K+1 and
/// conjugate-symmetric within 1e-9.
void validate_pattern(const SensorPattern& pattern);

void validate_array(const ArrayConfig& array);

ArrayConfig make_array(std::vector<SensorPattern> patterns, double sigma, double gamma_dbm,
                       double pc_shared);

/// Gain in dB at bearing psi: Re sum_k c_k e^{i k psi}. The imaginary
/// residual must stay below 1e-9 (checked, then discarded).
double eval_pattern(const SensorPattern& pattern, double psi_rad);

/// Pattern rotated by theta: eval(rotated, psi) == eval(original, psi - theta).
SensorPattern rotate_pattern(const SensorPattern& pattern, double theta_rad);

/// Weighted least-squares Fourier fit of gain samples (weights 1/variance).
/// Fits the real basis {1, cos k*psi, sin k*psi} and converts to complex
/// coefficients. Throws RankDeficient when the normal equations are singular.
SensorPattern fit_pattern_wls(const std::vector<double>& angles_rad,
                              const std::vector<double>& means_db,
                              const std::vector<double>& variances_db2, int order,
                              std::string sensor_id = {});

/// N copies of the base pattern, sensor m rotated by 2*pi*m/N. Gain-only:
/// no element positions or phase delays.
std::vector<SensorPattern> make_uca(const SensorPattern& base, int n_sensors);

/// Deterministic synthetic pattern with a main lobe at psi=0, side lobes
/// near +-90 deg and a back lobe near 180 deg. Used by the simulator when
/// no measured pattern file is supplied.
SensorPattern synth_pattern(double main_gain_db = 0.0, double side_level_db = -14.0,
                            double back_level_db = -20.0, int order = 7);

/// Gains entering likelihoods are clamped to [-120, +30] dB; out-of-range
/// evaluations bump a process-wide counter surfaced by gain_clamp_count().
double clamp_gain_db(double gain_db);
std::uint64_t gain_clamp_count();

}  // namespace doa
