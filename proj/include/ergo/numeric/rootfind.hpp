#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "ergo/errors.hpp"

namespace ergo {

// Geometric bracket expansion from a starting point, confined to the open
// interval (lo, hi). Steps toward a finite end halve the remaining gap, so
// the bracket approaches but never reaches the boundary; steps toward an
// infinite end double. Assumes f is monotone, throws if no sign change is
// found before the expansion budget runs out.
inline std::pair<double, double> bracket_root(const std::function<double(double)>& f,
                                              double start, double lo, double hi) {
    double a = start, b = start;
    double fa = f(a), fb = fa;
    double step_down = 0.5 * (1.0 + std::fabs(start));
    double step_up = step_down;
    for (int iter = 0; iter < 200; ++iter) {
        if (fa == 0.0) return {a, a};
        if (fb == 0.0) return {b, b};
        if (std::signbit(fa) != std::signbit(fb)) return {a, b};
        if (std::isinf(lo)) {
            a -= step_down;
            step_down *= 2.0;
        } else {
            a = lo + 0.5 * (a - lo);
        }
        if (std::isinf(hi)) {
            b += step_up;
            step_up *= 2.0;
        } else {
            b = hi - 0.5 * (hi - b);
        }
        fa = f(a);
        fb = f(b);
        if (!std::isfinite(fa) || !std::isfinite(fb))
            throw math_error("bracket_root: function not finite during expansion");
    }
    throw math_error("bracket_root: no sign change found; target may be outside range");
}

// Bisection on a bracketing interval, run down to a relative width of
// rel_tol. Requires f(a) and f(b) of opposite sign (or zero).
inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb))
        throw math_error("bisect: interval does not bracket a root");
    for (int iter = 0; iter < 400; ++iter) {
        const double mid = 0.5 * (a + b);
        // Width measured relative to the root itself, so inverses keep their
        // relative accuracy even for roots many orders below 1. A root at
        // exactly zero just runs the interval down to denormal width.
        if (std::fabs(b - a) <= rel_tol * std::fabs(mid) + 1e-300) return mid;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(fa)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

// Convenience for inverting a monotone function on an open interval.
inline double invert_monotone(const std::function<double(double)>& f, double target,
                              double start, double lo, double hi,
                              double rel_tol = 1e-12) {
    auto shifted = [&](double x) { return f(x) - target; };
    auto [a, b] = bracket_root(shifted, start, lo, hi);
    if (a == b) return a;
    return bisect(shifted, a, b, rel_tol);
}

}  // namespace ergo
