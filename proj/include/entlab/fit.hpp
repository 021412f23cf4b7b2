#pragma once

#include <span>
#include <utility>

namespace entlab {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;  // natural-log intercept
    double r2 = 1.0;
};

/// Ordinary least squares of ln(value) on ln(n). Needs at least three pairs,
/// all positive.
SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs);

/// Least squares of log2(value) on k (no log on the abscissa); slope is the
/// decay per unit k.
SlopeFit fit_semilog2(std::span<const std::pair<double, double>> pairs);

}  // namespace entlab
