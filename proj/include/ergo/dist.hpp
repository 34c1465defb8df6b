#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ergo/functions.hpp"

namespace ergo {

// How the spread of the utility level scales with elapsed time. brownian is
// the variance b^2 t implied by du = a dt + b dW; printed_t_squared keeps
// the b^2 t^2 form found in some treatments so the two can be compared
// against simulation head to head.
enum class VarianceConvention { brownian, printed_t_squared };

// Probability density of a scalar observable at one fixed time. The CDF is
// integrated numerically; anchors seed the quadrature so the mass is never
// missed on a wide support.
class Density {
public:
    struct parts {
        std::function<double(double)> pdf;
        Interval support{-INFINITY, INFINITY};
        double t = 0.0;
        // Feature locations inside the support, e.g. quantiles of the bump.
        std::vector<double> anchors;
        std::string name = "density";
    };

    // Requires t > 0 and total mass within 1e-6 of one; a density that
    // leaks more than that outside its support is reported, not repaired.
    explicit Density(parts p);

    // Zero outside the open support.
    double pdf(double x) const;
    // Mass at or below x, by adaptive quadrature between cached anchors.
    double cdf(double x) const;

    Interval support() const { return support_; }
    double time() const { return t_; }
    const std::string& name() const { return name_; }

private:
    std::function<double(double)> pdf_;
    Interval support_;
    double t_;
    std::string name_;
    std::vector<double> anchor_x_;    // sorted, strictly inside the support
    std::vector<double> anchor_cdf_;  // mass at or below each anchor
};

// Gaussian law of the utility level after time t, started at u0.
Density utility_density(const BrownianDrift& bd, double u0, double t,
                        VarianceConvention vc = VarianceConvention::brownian);

// Implied wealth distribution after time t: the utility-level Gaussian
// pushed through u^{-1}, density P_u(u(x)) u'(x) on the utility's domain.
Density wealth_density(const UtilityFunction& u, const BrownianDrift& bd,
                       double x0, double t,
                       VarianceConvention vc = VarianceConvention::brownian);

// One-sample Kolmogorov-Smirnov comparison of data against a density.
// threshold is the asymptotic 1% critical value 1.63 / sqrt(n).
struct DensityCheck {
    double ks = 0.0;
    double threshold = 0.0;
    std::size_t n = 0;
    bool pass = false;
};

// Requires at least 1000 finite samples inside the support.
DensityCheck validate_density(const Density& d, std::vector<double> samples);

// "x,pdf" rows over the given grid, shortest round-trip decimals.
void write_density_csv(std::ostream& os, const Density& d,
                       const std::vector<double>& grid);

}  // namespace ergo
