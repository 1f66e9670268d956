#pragma once

#include <span>

namespace skyrmion {

// Fitted slope (rate or exponent) with its standard error and the abscissa window.
struct FitResult {
    double value = 0.0;
    double stderr_ = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    int n_points = 0;
    double intercept = 0.0;
};

// Least-squares line y = value x + intercept; needs at least two distinct x.
FitResult fit_line(std::span<const double> x, std::span<const double> y);

} // namespace skyrmion
