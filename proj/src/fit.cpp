#include "entlab/fit.hpp"

#include <cmath>
#include <vector>

#include "entlab/common.hpp"

namespace entlab {

namespace {

SlopeFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit: abscissae are all equal");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

void check(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 3) throw InvalidArgument("fit: need at least three points");
    for (const auto& [a, b] : pairs)
        if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("fit: values must be positive and finite");
}

}  // namespace

SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs) {
    check(pairs);
    std::vector<double> x, y;
    for (const auto& [a, b] : pairs) {
        if (!(a > 0.0)) throw InvalidArgument("fit: abscissae must be positive");
        x.push_back(std::log(a));
        y.push_back(std::log(b));
    }
    return ols(x, y);
}

SlopeFit fit_semilog2(std::span<const std::pair<double, double>> pairs) {
    check(pairs);
    std::vector<double> x, y;
    for (const auto& [a, b] : pairs) {
        x.push_back(a);
        y.push_back(std::log2(b));
    }
    return ols(x, y);
}

}  // namespace entlab
