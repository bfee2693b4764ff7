#include "doa/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "doa/angles.hpp"
#include "doa/errors.hpp"

namespace doa {

double circular_error_deg(double a_deg, double b_deg) {
    if (!std::isfinite(a_deg) || !std::isfinite(b_deg))
        throw InvalidInput("circular error: non-finite bearing");
    return circular_diff_deg(a_deg, b_deg);
}

double rmse(std::span<const double> errors) {
    if (errors.empty()) throw InvalidInput("rmse: empty error list");
    double s = 0.0;
    for (double e : errors) {
        if (!std::isfinite(e)) throw InvalidInput("rmse: non-finite error");
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(errors.size()));
}

double rmse_circular_deg(std::span<const double> estimates_deg,
                         std::span<const double> truths_deg) {
    if (estimates_deg.size() != truths_deg.size())
        throw InvalidInput("rmse: estimate and truth lists differ in length");
    if (estimates_deg.empty()) throw InvalidInput("rmse: empty error list");
    double s = 0.0;
    for (std::size_t i = 0; i < estimates_deg.size(); ++i) {
        const double e = circular_error_deg(estimates_deg[i], truths_deg[i]);
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(estimates_deg.size()));
}

std::vector<std::pair<double, double>> error_cdf(std::span<const double> errors) {
    if (errors.empty()) throw InvalidInput("error_cdf: empty error list");
    std::vector<double> abs_err(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!std::isfinite(errors[i])) throw InvalidInput("error_cdf: non-finite error");
        abs_err[i] = std::abs(errors[i]);
    }
    std::sort(abs_err.begin(), abs_err.end());
    std::vector<std::pair<double, double>> cdf;
    const double n = static_cast<double>(abs_err.size());
    for (std::size_t i = 0; i < abs_err.size(); ++i) {
        const bool last_of_value = (i + 1 == abs_err.size()) || (abs_err[i + 1] != abs_err[i]);
        if (last_of_value) cdf.emplace_back(abs_err[i], static_cast<double>(i + 1) / n);
    }
    return cdf;
}

std::pair<double, double> mean_std(std::span<const double> samples) {
    if (samples.empty()) throw InvalidInput("mean_std: empty sample list");
    double mean = 0.0;
    for (double x : samples) {
        if (!std::isfinite(x)) throw InvalidInput("mean_std: non-finite sample");
        mean += x;
    }
    mean /= static_cast<double>(samples.size());
    if (samples.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(samples.size() - 1))};
}

Ci ci95(std::span<const double> samples) {
    if (samples.size() < 2) throw InvalidInput("ci95: need at least two samples");
    const auto [mean, sd] = mean_std(samples);
    const double half = 1.96 * sd / std::sqrt(static_cast<double>(samples.size()));
    return {mean, mean - half, mean + half};
}

}  // namespace doa
