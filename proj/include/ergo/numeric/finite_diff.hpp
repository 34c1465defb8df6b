#pragma once

#include <cmath>
#include <functional>

namespace ergo {

// Central difference with the usual cube-root-of-epsilon step, scaled to x.
// Balances truncation against cancellation for smooth f.
inline double central_difference(const std::function<double(double)>& f, double x) {
    const double h = 6.055454452393343e-06 * (1.0 + std::fabs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_difference(const std::function<double(double)>& f, double x) {
    const double h = 1.0e-4 * (1.0 + std::fabs(x));
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace ergo
