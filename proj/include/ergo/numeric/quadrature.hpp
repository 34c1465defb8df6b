#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "ergo/errors.hpp"

namespace ergo {

struct quad_result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss, QUADPACK dqk15 constants.
inline constexpr double gk_nodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double gk_weights[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
inline constexpr double gauss_weights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct panel {
    double lo, hi, value, error;
    bool operator<(const panel& other) const { return error < other.error; }
};

template <class F>
panel gauss_kronrod(const F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double kronrod = gk_weights[7] * f(center);
    double gauss = gauss_weights[3] * f(center);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * gk_nodes[i];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += gk_weights[i] * pair;
        if (i % 2 == 1) gauss += gauss_weights[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod))
        throw math_error("quadrature: integrand not finite inside interval");
    return {lo, hi, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod on a finite interval. The worst panel by
// error estimate is split first, so integrable endpoint singularities and
// narrow peaks get the refinement budget. breakpoints seed the initial
// segmentation; pass known feature locations (distribution quantiles, say)
// or a lone sharp peak between two panels can be missed entirely.
inline quad_result integrate_finite(const std::function<double(double)>& f,
                                    double lo, double hi,
                                    double rel_tol = 1e-10, double abs_tol = 0.0,
                                    std::vector<double> breakpoints = {},
                                    int max_panels = 4000) {
    quad_result result;
    if (lo == hi) {
        result.converged = true;
        return result;
    }
    const double sign = lo < hi ? 1.0 : -1.0;
    if (sign < 0) std::swap(lo, hi);

    breakpoints.push_back(lo);
    breakpoints.push_back(hi);
    std::sort(breakpoints.begin(), breakpoints.end());
    std::priority_queue<detail::panel> panels;
    double total = 0.0, total_error = 0.0;
    int used = 0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = std::max(lo, breakpoints[i]);
        const double b = std::min(hi, breakpoints[i + 1]);
        if (!(a < b)) continue;
        auto p = detail::gauss_kronrod(f, a, b);
        result.evaluations += 15;
        total += p.value;
        total_error += p.error;
        panels.push(p);
        ++used;
    }

    const auto tolerance = [&] {
        return std::max(abs_tol, rel_tol * std::fabs(total));
    };
    // Panels refined down to a few ulps of width leave the heap with their
    // error retired to frozen_error; splitting below that width is noise.
    double frozen_error = 0.0;
    while (total_error > tolerance() && used < max_panels && !panels.empty()) {
        const auto worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (worst.hi - worst.lo <=
            8 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(mid))) {
            total_error -= worst.error;
            frozen_error += worst.error;
            continue;
        }
        auto left = detail::gauss_kronrod(f, worst.lo, mid);
        auto right = detail::gauss_kronrod(f, mid, worst.hi);
        result.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++used;
    }

    result.value = sign * total;
    result.error = total_error + frozen_error;
    result.converged = result.error <= tolerance();
    return result;
}

// Same, but either bound may be infinite. Infinite ends are compressed with
// the rational substitutions x = a + t/(1-t), x = b - t/(1-t), and
// x = t/(1-t^2); node points never touch the compressed endpoint.
inline quad_result integrate(const std::function<double(double)>& f, double lo,
                             double hi, double rel_tol = 1e-10,
                             double abs_tol = 0.0,
                             std::vector<double> breakpoints = {},
                             int max_panels = 4000) {
    const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (!lo_inf && !hi_inf)
        return integrate_finite(f, lo, hi, rel_tol, abs_tol,
                                std::move(breakpoints), max_panels);

    std::function<double(double)> g;
    std::function<double(double)> to_t;
    double t_lo, t_hi;
    if (lo_inf && hi_inf) {
        g = [&f](double t) {
            const double s = 1.0 - t * t;
            return f(t / s) * (1.0 + t * t) / (s * s);
        };
        to_t = [](double x) {
            if (x == 0.0) return 0.0;
            return (std::sqrt(1.0 + 4.0 * x * x) - 1.0) / (2.0 * x);
        };
        t_lo = -1.0;
        t_hi = 1.0;
    } else if (hi_inf) {
        g = [&f, lo](double t) {
            const double s = 1.0 - t;
            return f(lo + t / s) / (s * s);
        };
        to_t = [lo](double x) { return (x - lo) / (1.0 + (x - lo)); };
        t_lo = 0.0;
        t_hi = 1.0;
    } else {
        g = [&f, hi](double t) {
            const double s = 1.0 - t;
            return f(hi - t / s) / (s * s);
        };
        to_t = [hi](double x) { return (hi - x) / (1.0 + (hi - x)); };
        t_lo = 0.0;
        t_hi = 1.0;
    }
    std::vector<double> t_breaks;
    t_breaks.reserve(breakpoints.size());
    for (double x : breakpoints)
        if (std::isfinite(x)) t_breaks.push_back(to_t(x));
    return integrate_finite(g, t_lo, t_hi, rel_tol, abs_tol,
                            std::move(t_breaks), max_panels);
}

}  // namespace ergo
