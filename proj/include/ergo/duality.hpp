#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ergo/functions.hpp"

namespace ergo {

// Wealth process generated by running Brownian motion in utility space and
// mapping back through the inverse utility:
//   a_x = a_u / u'(x) - (b_u^2 / 2) u''(x) / u'(x)^3,   b_x = b_u / u'(x).
// With b_u = 0 the result is the deterministic flow of the drift alone.
ItoProcess dynamic_from_utility(const UtilityFunction& u, BrownianDrift bd,
                                double x0);

// Whether a dynamic is generated by any utility at all. The implied ratio
//   rho(x) = (a_x(x) - b_x(x) b_x'(x) / 2) / b_x(x)
// must be one constant, the drift/volatility ratio a_u/b_u. The scale of
// (a_u, b_u) itself is not observable.
struct ConsistencyReport {
    bool consistent = false;
    double inferred_ratio = 0.0;  // median of rho over the window
    double residual = 0.0;        // max |rho - median| / (1 + |median|)
    double tolerance = 0.0;
    std::vector<std::pair<double, double>> ratios;  // (x, rho(x))
};

ConsistencyReport check_consistency(const ItoProcess& p,
                                    std::size_t grid_size = 256,
                                    double tolerance = 1e-6,
                                    std::optional<Interval> window = {});

// Window the consistency sweep uses when none is given: the domain inset
// when bounded, a wide multiplicative band around x0 against a finite
// endpoint, an additive band on the whole line.
Interval default_window(const ItoProcess& p);

// Probe points across a window: geometric toward a finite domain endpoint
// (where singular behavior concentrates), linear otherwise.
std::vector<double> window_grid(Interval window, Interval domain,
                                std::size_t n);

// Inverts the generation: u(x) = integral of b_u / b_x from x_ref to x,
// normalized to u(x_ref) = 0. Requires a consistent dynamic whose implied
// ratio matches bd; raises inconsistency_error otherwise.
UtilityFunction utility_from_dynamic(const ItoProcess& p, BrownianDrift bd,
                                     double x_ref);

// Largest relative gap between b and the best affine image alpha * a + beta
// over the probe points. Utilities that differ by an affine map generate
// identical dynamics, so this is the natural distance between them.
double max_affine_deviation(const UtilityFunction& a, const UtilityFunction& b,
                            std::span<const double> xs);

}  // namespace ergo
