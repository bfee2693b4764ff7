#pragma once

#include <span>
#include <utility>
#include <vector>

namespace doa {

/// Signed bearing error a - b wrapped to (-180, 180] degrees.
double circular_error_deg(double a_deg, double b_deg);

/// Root mean square of an error list.
double rmse(std::span<const double> errors);

/// RMSE of paired bearings after circular wrapping, degrees.
double rmse_circular_deg(std::span<const double> estimates_deg,
                         std::span<const double> truths_deg);

/// Empirical CDF of absolute errors: sorted unique values with cumulative
/// fractions (right-continuous steps).
std::vector<std::pair<double, double>> error_cdf(std::span<const double> errors);

struct Ci {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Normal-approximation 95% interval, mean +- 1.96 s/sqrt(n). Needs n >= 2;
/// constant samples collapse to a point interval.
Ci ci95(std::span<const double> samples);

/// Sample mean and standard deviation (n-1 denominator; zero for n < 2).
std::pair<double, double> mean_std(std::span<const double> samples);

}  // namespace doa
