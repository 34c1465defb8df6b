#include "ergo/duality.hpp"

#include <cmath>
#include <limits>

#include "ergo/numeric/format.hpp"
#include "ergo/numeric/quadrature.hpp"
#include "ergo/numeric/stats.hpp"

namespace ergo {

namespace {

std::string fmt(double v) { return format_double(v); }

// Display formulas for the catalog utilities; everything else reports
// coefficients through sampling only.
void catalog_formulas(const UtilityFunction& u, BrownianDrift bd,
                      ItoProcess::parts& p) {
    const double a = bd.drift, b = bd.volatility;
    if (u.name() == "linear") {
        p.drift_formula = fmt(a);
        p.diffusion_formula = fmt(b);
    } else if (u.name() == "log") {
        p.drift_formula = fmt(a + 0.5 * b * b) + "*x";
        p.diffusion_formula = fmt(b) + "*x";
    } else if (u.name() == "sqrt") {
        p.drift_formula = fmt(2.0 * a) + "*sqrt(x)+" + fmt(b * b);
        p.diffusion_formula = fmt(2.0 * b) + "*sqrt(x)";
    } else if (u.name() == "exp") {
        // With u = s e^x + C the offset drops out and the scale divides in:
        // a_x = (a/s) e^-x - (b/s)^2 e^-2x / 2, b_x = (b/s) e^-x.
        const double s = u.derivative(0.0);
        const double bs = b / s;
        p.drift_formula = fmt(a / s) + "*exp(-x)-" + fmt(0.5 * bs * bs) + "*exp(-2*x)";
        p.diffusion_formula = fmt(bs) + "*exp(-x)";
    }
}

}  // namespace

std::vector<double> window_grid(Interval window, Interval domain, std::size_t n) {
    std::vector<double> xs(n);
    if (std::isfinite(domain.lo) && window.lo > domain.lo) {
        const double r =
            std::pow((window.hi - domain.lo) / (window.lo - domain.lo),
                     1.0 / double(n - 1));
        double off = window.lo - domain.lo;
        for (std::size_t i = 0; i < n; ++i, off *= r) xs[i] = domain.lo + off;
        xs[n - 1] = window.hi;  // accumulated rounding must not escape the window
    } else {
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = window.lo + (window.hi - window.lo) * double(i) / double(n - 1);
    }
    return xs;
}

Interval default_window(const ItoProcess& p) {
    const Interval dom = p.domain();
    const double x0 = p.initial_wealth();
    const bool lo_finite = std::isfinite(dom.lo);
    const bool hi_finite = std::isfinite(dom.hi);
    if (lo_finite && hi_finite) {
        const double inset = 1e-9 * (dom.hi - dom.lo);
        return {dom.lo + inset, dom.hi - inset};
    }
    if (lo_finite) {
        const double off = x0 - dom.lo;
        return {dom.lo + off * 1e-3, dom.lo + off * 1e3};
    }
    if (hi_finite) {
        const double off = dom.hi - x0;
        return {dom.hi - off * 1e3, dom.hi - off * 1e-3};
    }
    const double half = 8.0 * (1.0 + std::fabs(x0));
    return {x0 - half, x0 + half};
}

ItoProcess dynamic_from_utility(const UtilityFunction& u, BrownianDrift bd,
                                double x0) {
    bd.validate();
    const double a = bd.drift, b = bd.volatility;
    ItoProcess::parts p;
    p.drift = [u, a, b](double x) {
        const double d1 = u.derivative(x);
        const double d2 = u.second_derivative(x);
        return a / d1 - 0.5 * b * b * d2 / (d1 * d1 * d1);
    };
    p.diffusion = [u, b](double x) { return b / u.derivative(x); };
    p.diffusion_derivative = [u, b](double x) {
        const double d1 = u.derivative(x);
        return -b * u.second_derivative(x) / (d1 * d1);
    };
    p.domain = u.domain();
    p.x0 = x0;
    p.name = u.name() + "_generated";
    catalog_formulas(u, bd, p);
    if (b == 0.0) return ItoProcess::deterministic(std::move(p));
    return ItoProcess(std::move(p));
}

ConsistencyReport check_consistency(const ItoProcess& p, std::size_t grid_size,
                                    double tolerance,
                                    std::optional<Interval> window) {
    if (p.zero_noise())
        throw validation_error(
            "consistency is undefined for a zero-noise dynamic: every utility "
            "generates a deterministic flow");
    if (grid_size < 8)
        throw validation_error("consistency grid needs at least 8 points");
    const Interval win = window ? *window : default_window(p);
    if (!(win.lo < win.hi) || !p.domain().contains(win.lo) ||
        !p.domain().contains(win.hi))
        throw validation_error("consistency window must lie inside the domain");

    ConsistencyReport report;
    report.tolerance = tolerance;
    report.ratios.reserve(grid_size);
    std::vector<double> rhos, floors;
    rhos.reserve(grid_size);
    floors.reserve(grid_size);
    for (double x : window_grid(win, p.domain(), grid_size)) {
        const double b = p.diffusion(x);
        if (!(b > 0.0))
            throw math_error("diffusion not positive at x=" + fmt(x) +
                             " inside the consistency window");
        const double a = p.drift(x);
        const double half_bb = 0.5 * b * p.diffusion_derivative(x);
        const double rho = (a - half_bb) / b;
        report.ratios.emplace_back(x, rho);
        rhos.push_back(rho);
        // Achievable precision of rho at this point: when a and b b'/2
        // nearly cancel, their difference carries the rounding noise of the
        // larger operand. Deviations below that floor are not evidence.
        floors.push_back(64.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::fabs(a), std::fabs(half_bb)) / b);
    }
    report.inferred_ratio = median(rhos);
    double worst = 0.0;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        const double dev = std::fabs(rhos[i] - report.inferred_ratio);
        worst = std::max(worst, dev <= floors[i] ? 0.0 : dev - floors[i]);
    }
    report.residual = worst / (1.0 + std::fabs(report.inferred_ratio));
    report.consistent = report.residual <= tolerance;
    return report;
}

UtilityFunction utility_from_dynamic(const ItoProcess& p, BrownianDrift bd,
                                     double x_ref) {
    bd.validate();
    if (!(bd.volatility > 0.0))
        throw validation_error(
            "recovering a utility needs positive utility volatility; a "
            "zero-noise dynamic pins down no transformation");
    if (p.zero_noise())
        throw validation_error(
            "cannot recover a utility from a zero-noise dynamic");
    if (!p.domain().contains(x_ref))
        throw validation_error("reference wealth x_ref=" + fmt(x_ref) +
                               " lies outside the domain");

    const auto report = check_consistency(p);
    if (!report.consistent)
        throw inconsistency_error(
            "dynamic is not generated by any utility: implied drift/volatility "
            "ratio varies by " +
            fmt(report.residual) + " across the window (tolerance " +
            fmt(report.tolerance) + ")");
    const double ratio = bd.ratio();
    if (std::fabs(ratio - report.inferred_ratio) >
        std::max(report.tolerance, 1e-6) * (1.0 + std::fabs(report.inferred_ratio)))
        throw inconsistency_error(
            "supplied drift/volatility ratio " + fmt(ratio) +
            " does not match the ratio " + fmt(report.inferred_ratio) +
            " implied by the dynamic");

    const double b_u = bd.volatility;
    // u' = b_u / b_x is exact; u comes from quadrature of it.
    UtilityFunction::parts parts;
    parts.value = [p, b_u, x_ref](double x) {
        auto r = integrate([&](double s) { return b_u / p.diffusion(s); }, x_ref, x,
                           1e-12, 1e-14);
        if (!r.converged)
            throw math_error("utility integral from " + fmt(x_ref) + " to " +
                             fmt(x) + " did not converge");
        return r.value;
    };
    parts.derivative = [p, b_u](double x) { return b_u / p.diffusion(x); };
    parts.second_derivative = [p, b_u](double x) {
        const double b = p.diffusion(x);
        return -b_u * p.diffusion_derivative(x) / (b * b);
    };
    parts.domain = p.domain();
    parts.offset = 0.0;  // u(x_ref) = 0 by construction
    parts.name = "recovered";
    return UtilityFunction(std::move(parts));
}

double max_affine_deviation(const UtilityFunction& a, const UtilityFunction& b,
                            std::span<const double> xs) {
    if (xs.size() < 3)
        throw validation_error("affine comparison needs at least 3 points");
    std::vector<double> ua(xs.size()), ub(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ua[i] = a.value(xs[i]);
        ub[i] = b.value(xs[i]);
    }
    const double ma = mean(ua), mb = mean(ub);
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cov += (ua[i] - ma) * (ub[i] - mb);
        var += (ua[i] - ma) * (ua[i] - ma);
    }
    if (var == 0.0) throw validation_error("affine comparison against a constant");
    const double alpha = cov / var;
    const double beta = mb - alpha * ma;
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fit = alpha * ua[i] + beta;
        worst = std::max(worst,
                         std::fabs(ub[i] - fit) / (1.0 + std::fabs(ub[i])));
    }
    return worst;
}

}  // namespace ergo
