#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ergo/errors.hpp"
#include "ergo/expr.hpp"

namespace ergo {

// Open interval, endpoints may be infinite.
struct Interval {
    double lo, hi;
    bool contains(double x) const { return x > lo && x < hi; }
};

// Sample points for validation and consistency sweeps: geometric spacing
// toward a finite endpoint (where singular behavior concentrates), linear
// across doubly infinite domains.
std::vector<double> sample_grid(Interval domain, std::size_t n);

// Drift and volatility of the utility-side Brownian motion du = a dt + b dW.
struct BrownianDrift {
    double drift = 0.0;
    double volatility = 1.0;

    void validate() const {
        if (volatility < 0.0)
            throw validation_error("utility volatility must be non-negative");
    }
    // Only the ratio drift/volatility is observable in the wealth dynamic;
    // rescaling (a, b) by a common factor is a gauge choice.
    double ratio() const {
        if (volatility <= 0.0)
            throw validation_error("drift/volatility ratio needs positive volatility");
        return drift / volatility;
    }
};

// Strictly increasing, twice differentiable map from wealth to utility,
// with an explicit inverse. The additive constant recorded in
// constant_offset never influences the induced dynamic; two utilities that
// differ by an affine map generate the same wealth process.
class UtilityFunction {
public:
    struct parts {
        std::function<double(double)> value, derivative, second_derivative;
        // Leave the inverse family empty to fall back on bracketed
        // bisection of value().
        std::function<double(double)> inverse, inverse_derivative,
            inverse_second_derivative;
        Interval domain{-INFINITY, INFINITY};
        double offset = 0.0;
        std::string name = "utility";
    };

    explicit UtilityFunction(parts p);

    double value(double x) const { return value_(x); }
    double derivative(double x) const { return derivative_(x); }
    double second_derivative(double x) const { return second_(x); }
    double inverse(double u) const { return inverse_(u); }
    double inverse_derivative(double u) const { return inverse_d_(u); }
    double inverse_second_derivative(double u) const { return inverse_dd_(u); }

    Interval domain() const { return domain_; }
    double constant_offset() const { return offset_; }
    const std::string& name() const { return name_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::function<double(double)> value_, derivative_, second_;
    std::function<double(double)> inverse_, inverse_d_, inverse_dd_;
    Interval domain_;
    double offset_;
    std::string name_;
    std::vector<std::string> warnings_;
};

// Ito diffusion dx = a(x) dt + b(x) dW on an open domain, with the
// diffusion's spatial derivative available for consistency arithmetic.
class ItoProcess {
public:
    struct parts {
        std::function<double(double)> drift, diffusion, diffusion_derivative;
        Interval domain{-INFINITY, INFINITY};
        double x0 = 1.0;
        std::string name = "dynamic";
        std::string drift_formula, diffusion_formula;  // display only
    };

    // Validates diffusion > 0 across the domain sample.
    explicit ItoProcess(parts p);
    // Zero-noise variant: diffusion must vanish identically instead.
    static ItoProcess deterministic(parts p);

    double drift(double x) const { return drift_(x); }
    double diffusion(double x) const { return diffusion_(x); }
    double diffusion_derivative(double x) const { return diffusion_d_(x); }

    Interval domain() const { return domain_; }
    double initial_wealth() const { return x0_; }
    bool zero_noise() const { return zero_noise_; }
    const std::string& name() const { return name_; }
    const std::string& drift_formula() const { return drift_formula_; }
    const std::string& diffusion_formula() const { return diffusion_formula_; }

private:
    ItoProcess(parts p, bool zero_noise);

    std::function<double(double)> drift_, diffusion_, diffusion_d_;
    Interval domain_;
    double x0_;
    bool zero_noise_;
    std::string name_, drift_formula_, diffusion_formula_;
};

// Named construction: u(x) = x, ln x, sqrt x, scale * e^x + offset.
UtilityFunction linear_utility();
UtilityFunction log_utility();
UtilityFunction sqrt_utility();
UtilityFunction exp_utility(double scale = 1.0, double offset = 0.0);

// Named dynamics: constant coefficients, geometric Brownian motion, the
// square-root process generated by sqrt utility, and the exponential-decay
// process generated by exp utility.
ItoProcess additive_dynamic(double a, double b, double x0 = 1.0);
ItoProcess gbm_dynamic(double mu, double sigma, double x0 = 1.0);
ItoProcess cramer_dynamic(double utility_drift, double utility_volatility,
                          double x0 = 1.0);
ItoProcess exp_test_dynamic(double utility_drift, double utility_volatility,
                            double x0 = 1.0);

// Construction from parsed expressions; derivatives are symbolic, the
// utility inverse is bracketed bisection.
UtilityFunction utility_from_expression(const Expr& u, Interval domain);
ItoProcess dynamic_from_expressions(const Expr& drift, const Expr& diffusion,
                                    Interval domain, double x0);

// Catalog lookup by name (aliases accepted: "log" for log_utility and so
// on). Unknown names or parameters raise validation_error.
UtilityFunction catalog_utility(const std::string& name,
                                const std::map<std::string, double>& params = {});
ItoProcess catalog_dynamic(const std::string& name,
                           const std::map<std::string, double>& params);
std::vector<std::string> catalog_utility_names();
std::vector<std::string> catalog_dynamic_names();

}  // namespace ergo
