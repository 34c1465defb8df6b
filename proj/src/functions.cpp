#include "ergo/functions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ergo/numeric/rootfind.hpp"

namespace ergo {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

// Window actually sampled inside an infinite domain. Wide enough to expose
// boundary behavior, narrow enough that tame functions stay finite.
constexpr double span_scale = 1e6;
constexpr double linear_halfwidth = 25.0;

}  // namespace

std::vector<double> sample_grid(Interval domain, std::size_t n) {
    if (!(domain.lo < domain.hi))
        throw validation_error("interval is empty");
    if (n < 2) throw validation_error("sample_grid: need at least 2 points");
    std::vector<double> xs(n);
    const bool lo_inf = std::isinf(domain.lo), hi_inf = std::isinf(domain.hi);
    if (lo_inf && hi_inf) {
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = -linear_halfwidth +
                    2.0 * linear_halfwidth * double(i) / double(n - 1);
    } else if (!lo_inf && hi_inf) {
        // Geometric in the offset from the finite end.
        const double s = 1e-6 * (1.0 + std::fabs(domain.lo));
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = domain.lo +
                    s * std::pow(span_scale * span_scale, double(i) / double(n - 1));
    } else if (lo_inf && !hi_inf) {
        const double s = 1e-6 * (1.0 + std::fabs(domain.hi));
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = domain.hi -
                    s * std::pow(span_scale * span_scale,
                                 double(n - 1 - i) / double(n - 1));
    } else {
        const double inset = 1e-9 * (domain.hi - domain.lo);
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = domain.lo + inset +
                    (domain.hi - domain.lo - 2.0 * inset) * double(i) / double(n - 1);
    }
    return xs;
}

UtilityFunction::UtilityFunction(parts p)
    : value_(std::move(p.value)),
      derivative_(std::move(p.derivative)),
      second_(std::move(p.second_derivative)),
      inverse_(std::move(p.inverse)),
      inverse_d_(std::move(p.inverse_derivative)),
      inverse_dd_(std::move(p.inverse_second_derivative)),
      domain_(p.domain),
      offset_(p.offset),
      name_(std::move(p.name)) {
    if (!value_ || !derivative_ || !second_)
        throw validation_error("utility needs value and two derivatives");
    if (!(domain_.lo < domain_.hi))
        throw validation_error("utility domain is empty");

    if (!inverse_) {
        // Bracketed bisection fallback; derivative identities for the rest.
        const auto value = value_;
        const auto derivative = derivative_;
        const auto second = second_;
        const Interval dom = domain_;
        const double start = sample_grid(dom, 3)[1];
        auto inv = [value, dom, start](double u) {
            return invert_monotone(value, u, start, dom.lo, dom.hi);
        };
        inverse_ = inv;
        inverse_d_ = [inv, derivative](double u) { return 1.0 / derivative(inv(u)); };
        inverse_dd_ = [inv, derivative, second](double u) {
            const double x = inv(u);
            const double d = derivative(x);
            return -second(x) / (d * d * d);
        };
    } else if (!inverse_d_ || !inverse_dd_) {
        throw validation_error(
            "utility with explicit inverse needs its derivatives too");
    }

    // Strict monotonicity across the working window.
    const auto grid = sample_grid(domain_, 1024);
    double prev = -INFINITY;
    for (double x : grid) {
        const double u = value_(x);
        const double du = derivative_(x);
        if (!std::isfinite(u))
            throw validation_error("utility not finite at sampled x=" + fmt(x));
        if (!(du > 0.0))
            throw validation_error(
                "utility must be strictly increasing; derivative not positive at x=" +
                fmt(x));
        if (!(u > prev))
            throw validation_error("utility values not increasing at x=" + fmt(x));
        prev = u;
    }

    // Spot check that the inverse actually inverts.
    for (std::size_t i = 0; i < grid.size(); i += grid.size() / 16) {
        const double x = grid[i];
        const double back = inverse_(value_(x));
        if (!(std::fabs(back - x) <= 1e-6 * (1.0 + std::fabs(x))))
            throw validation_error("inverse fails round trip at x=" + fmt(x));
    }

    // Range growth check. A utility that levels off toward a domain end maps
    // only part of the real line, so some Brownian utility levels have no
    // wealth preimage. Saturation shows up as shrinking increments between
    // consecutive grid points while the value stays modest; slow unbounded
    // growth (log) keeps its increments. The exponential catalog entry
    // saturates toward minus infinity by design, so this stays a warning,
    // never an error.
    const std::size_t n = grid.size();
    const std::size_t stride = n / 8;  // decade-scale probes, not neighbors
    const auto leveling = [&](double near_end, double mid, double far) {
        const double inc_end = std::fabs(near_end - mid);
        const double inc_prev = std::fabs(mid - far);
        return std::fabs(near_end) < 1e6 && inc_end < 0.9 * inc_prev;
    };
    if (leveling(value_(grid[n - 1]), value_(grid[n - 1 - stride]),
                 value_(grid[n - 1 - 2 * stride])))
        warnings_.push_back(
            "utility appears bounded toward the upper end of its domain; "
            "levels above its range have no wealth equivalent");
    if (leveling(value_(grid[0]), value_(grid[stride]), value_(grid[2 * stride])))
        warnings_.push_back(
            "utility appears bounded toward the lower end of its domain; "
            "levels below its range have no wealth equivalent");
}

ItoProcess::ItoProcess(parts p) : ItoProcess(std::move(p), false) {}

ItoProcess ItoProcess::deterministic(parts p) {
    return ItoProcess(std::move(p), true);
}

ItoProcess::ItoProcess(parts p, bool zero_noise)
    : drift_(std::move(p.drift)),
      diffusion_(std::move(p.diffusion)),
      diffusion_d_(std::move(p.diffusion_derivative)),
      domain_(p.domain),
      x0_(p.x0),
      zero_noise_(zero_noise),
      name_(std::move(p.name)),
      drift_formula_(std::move(p.drift_formula)),
      diffusion_formula_(std::move(p.diffusion_formula)) {
    if (!drift_ || !diffusion_ || !diffusion_d_)
        throw validation_error("dynamic needs drift, diffusion and its derivative");
    if (!(domain_.lo < domain_.hi))
        throw validation_error("dynamic domain is empty");
    if (!domain_.contains(x0_))
        throw validation_error("initial wealth x0=" + fmt(x0_) +
                               " lies outside the domain");
    for (double x : sample_grid(domain_, 256)) {
        const double b = diffusion_(x);
        if (!std::isfinite(drift_(x)) || !std::isfinite(b))
            throw validation_error("dynamic coefficients not finite at x=" + fmt(x));
        if (zero_noise_) {
            if (b != 0.0)
                throw validation_error(
                    "deterministic dynamic has non-zero diffusion at x=" + fmt(x));
        } else if (!(b > 0.0)) {
            throw validation_error("diffusion must be positive at x=" + fmt(x) +
                                   "; use ItoProcess::deterministic for zero noise");
        }
    }
}

UtilityFunction linear_utility() {
    UtilityFunction::parts p;
    p.value = [](double x) { return x; };
    p.derivative = [](double) { return 1.0; };
    p.second_derivative = [](double) { return 0.0; };
    p.inverse = [](double u) { return u; };
    p.inverse_derivative = [](double) { return 1.0; };
    p.inverse_second_derivative = [](double) { return 0.0; };
    p.domain = {-INFINITY, INFINITY};
    p.name = "linear";
    return UtilityFunction(std::move(p));
}

UtilityFunction log_utility() {
    UtilityFunction::parts p;
    p.value = [](double x) { return std::log(x); };
    p.derivative = [](double x) { return 1.0 / x; };
    p.second_derivative = [](double x) { return -1.0 / (x * x); };
    p.inverse = [](double u) { return std::exp(u); };
    p.inverse_derivative = [](double u) { return std::exp(u); };
    p.inverse_second_derivative = [](double u) { return std::exp(u); };
    p.domain = {0.0, INFINITY};
    p.name = "log";
    return UtilityFunction(std::move(p));
}

UtilityFunction sqrt_utility() {
    UtilityFunction::parts p;
    p.value = [](double x) { return std::sqrt(x); };
    p.derivative = [](double x) { return 0.5 / std::sqrt(x); };
    p.second_derivative = [](double x) { return -0.25 / (x * std::sqrt(x)); };
    p.inverse = [](double u) {
        if (u <= 0.0)
            throw math_error("sqrt utility level must be positive, got " + fmt(u));
        return u * u;
    };
    p.inverse_derivative = [](double u) { return 2.0 * u; };
    p.inverse_second_derivative = [](double) { return 2.0; };
    p.domain = {0.0, INFINITY};
    p.name = "sqrt";
    return UtilityFunction(std::move(p));
}

UtilityFunction exp_utility(double scale, double offset) {
    if (!(scale > 0.0))
        throw validation_error("exp utility scale must be positive");
    UtilityFunction::parts p;
    p.value = [scale, offset](double x) { return scale * std::exp(x) + offset; };
    p.derivative = [scale](double x) { return scale * std::exp(x); };
    p.second_derivative = [scale](double x) { return scale * std::exp(x); };
    p.inverse = [scale, offset](double u) {
        if (!(u > offset))
            throw math_error("exp utility level " + fmt(u) +
                             " is at or below the lower range bound " + fmt(offset));
        return std::log((u - offset) / scale);
    };
    p.inverse_derivative = [offset](double u) { return 1.0 / (u - offset); };
    p.inverse_second_derivative = [offset](double u) {
        return -1.0 / ((u - offset) * (u - offset));
    };
    p.domain = {-INFINITY, INFINITY};
    p.offset = offset;
    p.name = "exp";
    return UtilityFunction(std::move(p));
}

ItoProcess additive_dynamic(double a, double b, double x0) {
    if (b < 0.0) throw validation_error("additive noise amplitude must be >= 0");
    ItoProcess::parts p;
    p.drift = [a](double) { return a; };
    p.diffusion = [b](double) { return b; };
    p.diffusion_derivative = [](double) { return 0.0; };
    p.domain = {-INFINITY, INFINITY};
    p.x0 = x0;
    p.name = "additive";
    p.drift_formula = fmt(a);
    p.diffusion_formula = fmt(b);
    if (b == 0.0) return ItoProcess::deterministic(std::move(p));
    return ItoProcess(std::move(p));
}

ItoProcess gbm_dynamic(double mu, double sigma, double x0) {
    if (sigma < 0.0) throw validation_error("gbm volatility must be >= 0");
    ItoProcess::parts p;
    p.drift = [mu](double x) { return mu * x; };
    p.diffusion = [sigma](double x) { return sigma * x; };
    p.diffusion_derivative = [sigma](double) { return sigma; };
    p.domain = {0.0, INFINITY};
    p.x0 = x0;
    p.name = "gbm";
    p.drift_formula = fmt(mu) + "*x";
    p.diffusion_formula = fmt(sigma) + "*x";
    if (sigma == 0.0) return ItoProcess::deterministic(std::move(p));
    return ItoProcess(std::move(p));
}

ItoProcess cramer_dynamic(double utility_drift, double utility_volatility,
                          double x0) {
    if (!(utility_volatility > 0.0))
        throw validation_error("square-root dynamic needs positive utility volatility");
    const double a = utility_drift, b = utility_volatility;
    ItoProcess::parts p;
    p.drift = [a, b](double x) { return 2.0 * a * std::sqrt(x) + b * b; };
    p.diffusion = [b](double x) { return 2.0 * b * std::sqrt(x); };
    p.diffusion_derivative = [b](double x) { return b / std::sqrt(x); };
    p.domain = {0.0, INFINITY};
    p.x0 = x0;
    p.name = "cramer";
    p.drift_formula = fmt(2.0 * a) + "*sqrt(x)+" + fmt(b * b);
    p.diffusion_formula = fmt(2.0 * b) + "*sqrt(x)";
    return ItoProcess(std::move(p));
}

ItoProcess exp_test_dynamic(double utility_drift, double utility_volatility,
                            double x0) {
    if (!(utility_volatility > 0.0))
        throw validation_error(
            "exponential-decay dynamic needs positive utility volatility");
    const double ratio = utility_drift / utility_volatility;
    ItoProcess::parts p;
    p.drift = [ratio](double x) {
        const double e = std::exp(-x);
        return ratio * e - 0.5 * e * e;
    };
    p.diffusion = [](double x) { return std::exp(-x); };
    p.diffusion_derivative = [](double x) { return -std::exp(-x); };
    p.domain = {-INFINITY, INFINITY};
    p.x0 = x0;
    p.name = "exp_test";
    p.drift_formula = fmt(ratio) + "*exp(-x)-0.5*exp(-2*x)";
    p.diffusion_formula = "exp(-x)";
    return ItoProcess(std::move(p));
}

UtilityFunction utility_from_expression(const Expr& u, Interval domain) {
    const Expr d1 = u.derivative();
    const Expr d2 = d1.derivative();
    UtilityFunction::parts p;
    p.value = [u](double x) { return u.eval(x); };
    p.derivative = [d1](double x) { return d1.eval(x); };
    p.second_derivative = [d2](double x) { return d2.eval(x); };
    p.domain = domain;
    p.name = "expr:" + u.str();
    return UtilityFunction(std::move(p));
}

ItoProcess dynamic_from_expressions(const Expr& drift, const Expr& diffusion,
                                    Interval domain, double x0) {
    const Expr diffusion_d = diffusion.derivative();
    ItoProcess::parts p;
    p.drift = [drift](double x) { return drift.eval(x); };
    p.diffusion = [diffusion](double x) { return diffusion.eval(x); };
    p.diffusion_derivative = [diffusion_d](double x) { return diffusion_d.eval(x); };
    p.domain = domain;
    p.x0 = x0;
    p.name = "expr";
    p.drift_formula = drift.str();
    p.diffusion_formula = diffusion.str();
    return ItoProcess(std::move(p));
}

namespace {

double take(const std::map<std::string, double>& params, const std::string& key,
            const char* dynamic_name) {
    auto it = params.find(key);
    if (it == params.end())
        throw validation_error(std::string(dynamic_name) + " needs parameter '" +
                               key + "'");
    return it->second;
}

double take_or(const std::map<std::string, double>& params, const std::string& key,
               double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> known,
                    const std::string& name) {
    for (const auto& [key, value] : params) {
        (void)value;
        if (std::find_if(known.begin(), known.end(), [&](const char* k) {
                return key == k;
            }) == known.end())
            throw validation_error("unknown parameter '" + key + "' for " + name);
    }
}

}  // namespace

UtilityFunction catalog_utility(const std::string& name,
                                const std::map<std::string, double>& params) {
    if (name == "linear" || name == "linear_utility") {
        reject_unknown(params, {}, name);
        return linear_utility();
    }
    if (name == "log" || name == "log_utility") {
        reject_unknown(params, {}, name);
        return log_utility();
    }
    if (name == "sqrt" || name == "sqrt_utility") {
        reject_unknown(params, {}, name);
        return sqrt_utility();
    }
    if (name == "exp" || name == "exp_utility" || name == "exp_test_u") {
        reject_unknown(params, {"scale", "offset"}, name);
        return exp_utility(take_or(params, "scale", 1.0),
                           take_or(params, "offset", 0.0));
    }
    throw validation_error("unknown utility '" + name + "'; catalog has " +
                           "linear, log, sqrt, exp");
}

ItoProcess catalog_dynamic(const std::string& name,
                           const std::map<std::string, double>& params) {
    if (name == "additive" || name == "additive_dynamic") {
        reject_unknown(params, {"a", "b", "x0"}, name);
        return additive_dynamic(take(params, "a", "additive"),
                                take(params, "b", "additive"),
                                take_or(params, "x0", 1.0));
    }
    if (name == "gbm" || name == "gbm_dynamic") {
        reject_unknown(params, {"mu", "sigma", "x0"}, name);
        return gbm_dynamic(take(params, "mu", "gbm"), take(params, "sigma", "gbm"),
                           take_or(params, "x0", 1.0));
    }
    if (name == "cramer" || name == "cramer_dynamic") {
        reject_unknown(params, {"a_u", "b_u", "x0"}, name);
        return cramer_dynamic(take(params, "a_u", "cramer"),
                              take(params, "b_u", "cramer"),
                              take_or(params, "x0", 1.0));
    }
    if (name == "exp_test" || name == "exp_test_dynamic") {
        reject_unknown(params, {"a_u", "b_u", "x0"}, name);
        return exp_test_dynamic(take(params, "a_u", "exp_test"),
                                take(params, "b_u", "exp_test"),
                                take_or(params, "x0", 1.0));
    }
    throw validation_error("unknown dynamic '" + name + "'; catalog has " +
                           "additive, gbm, cramer, exp_test");
}

std::vector<std::string> catalog_utility_names() {
    return {"linear", "log", "sqrt", "exp"};
}

std::vector<std::string> catalog_dynamic_names() {
    return {"additive", "gbm", "cramer", "exp_test"};
}

}  // namespace ergo
