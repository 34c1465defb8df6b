#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "ergo/dist.hpp"
#include "ergo/duality.hpp"
#include "ergo/errors.hpp"
#include "ergo/functions.hpp"
#include "ergo/numeric/normal.hpp"
#include "ergo/numeric/philox.hpp"
#include "ergo/sde.hpp"

using namespace ergo;

namespace {

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
    std::vector<double> xs(n);
    const double r = std::log(hi / lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) xs[i] = lo * std::exp(r * double(i));
    return xs;
}

// Exact draws from the utility-level Gaussian pushed through u^{-1}.
std::vector<double> inverse_cdf_sample(const UtilityFunction& u, double mean,
                                       double sd, std::size_t n,
                                       std::uint64_t seed) {
    const counter_stream rng(seed, 0);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = u.inverse(mean + sd * normal_quantile(rng.uniform_at(i)));
    return xs;
}

}  // namespace

TEST_CASE("utility level density is the advected Gaussian") {
    const double mean = 2.0 + 0.5 * 4.0;  // u0 + a t
    const double sd = 0.3 * 2.0;          // b sqrt(t)
    auto d = utility_density({0.5, 0.3}, 2.0, 4.0);
    CHECK(d.time() == doctest::Approx(4.0));
    CHECK(d.pdf(mean) ==
          doctest::Approx(1.0 / (sd * std::sqrt(2.0 * M_PI))).epsilon(1e-12));
    CHECK(d.cdf(mean) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(d.cdf(mean + sd) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-9));
    CHECK(d.cdf(mean - 2.0 * sd) ==
          doctest::Approx(normal_cdf(-2.0)).epsilon(1e-7));
    CHECK(d.name() == "utility_level");
}

TEST_CASE("printed variance convention spreads like t, not sqrt t") {
    auto brownian = utility_density({0.0, 1.0}, 0.0, 5.0);
    auto printed = utility_density({0.0, 1.0}, 0.0, 5.0,
                                   VarianceConvention::printed_t_squared);
    // Peak heights are 1 / (sd sqrt(2 pi)) with sd sqrt(5) and 5.
    CHECK(brownian.pdf(0.0) ==
          doctest::Approx(1.0 / std::sqrt(10.0 * M_PI)).epsilon(1e-12));
    CHECK(printed.pdf(0.0) ==
          doctest::Approx(1.0 / (5.0 * std::sqrt(2.0 * M_PI))).epsilon(1e-12));
    CHECK(printed.cdf(5.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-9));
}

TEST_CASE("identity utility leaves the level density unchanged") {
    auto level = utility_density({0.3, 0.5}, 2.0, 4.0);
    auto wealth = wealth_density(linear_utility(), {0.3, 0.5}, 2.0, 4.0);
    for (double x : {0.5, 1.0, 2.0, 3.2, 4.0, 6.0}) {
        CHECK(wealth.pdf(x) == doctest::Approx(level.pdf(x)).epsilon(1e-12));
        CHECK(wealth.cdf(x) == doctest::Approx(level.cdf(x)).epsilon(1e-8));
    }
    CHECK(wealth.name() == "linear_wealth");
}

TEST_CASE("log utility wealth density is the lognormal") {
    // ln x ~ N(0.5, 0.4) after t = 10 under a = 0.05, b = 0.2.
    auto d = wealth_density(log_utility(), {0.05, 0.2}, 1.0, 10.0);
    const double mean = 0.5, var = 0.04 * 10.0;
    for (double x : geometric_grid(0.05, 20.0, 9)) {
        const double lx = std::log(x);
        const double pdf = std::exp(-(lx - mean) * (lx - mean) / (2.0 * var)) /
                           (x * std::sqrt(2.0 * M_PI * var));
        CHECK(d.pdf(x) == doctest::Approx(pdf).epsilon(1e-9));
        CHECK(d.cdf(x) ==
              doctest::Approx(normal_cdf((lx - mean) / std::sqrt(var)))
                  .epsilon(1e-7));
    }
    CHECK(d.pdf(0.0) == 0.0);
    CHECK(d.pdf(-1.0) == 0.0);
    CHECK(d.cdf(-1.0) == 0.0);
}

TEST_CASE("wealth CDF agrees with the closed form through the level map") {
    auto u = exp_utility();
    const BrownianDrift bd{0.5, 1.0};
    const double x0 = 3.5, t = 5.0;
    auto d = wealth_density(u, bd, x0, t);
    const double mean = u.value(x0) + bd.drift * t;
    const double sd = bd.volatility * std::sqrt(t);
    for (double x : {3.0, 3.3, 3.5, 3.6, 3.8, 4.0}) {
        const double oracle = normal_cdf((u.value(x) - mean) / sd);
        CHECK(d.cdf(x) == doctest::Approx(oracle).epsilon(1e-7));
    }
    // Probability is preserved interval by interval, not only pointwise.
    const double za = (u.value(3.4) - mean) / sd;
    const double zb = (u.value(3.7) - mean) / sd;
    CHECK(d.cdf(3.7) - d.cdf(3.4) ==
          doctest::Approx(normal_cdf(zb) - normal_cdf(za)).epsilon(1e-7));
}

TEST_CASE("construction rejects bad parameters") {
    CHECK_THROWS_AS(utility_density({0.5, 0.3}, 0.0, 0.0), validation_error);
    CHECK_THROWS_AS(utility_density({0.5, 0.3}, 0.0, -1.0), validation_error);
    CHECK_THROWS_AS(utility_density({0.5, 0.0}, 0.0, 1.0), validation_error);
    CHECK_THROWS_AS(wealth_density(log_utility(), {0.05, 0.2}, -1.0, 1.0),
                    validation_error);
    // Exponential utility started low: a visible slice of the level
    // Gaussian sits below the utility's range, so the pushforward cannot
    // integrate to one.
    CHECK_THROWS_AS(wealth_density(exp_utility(), {0.5, 1.0}, 0.5, 25.0),
                    validation_error);
}

TEST_CASE("KS validation accepts exact samples and flags a shifted law") {
    auto u = log_utility();
    const BrownianDrift bd{0.05, 0.3};
    auto d = wealth_density(u, bd, 1.0, 10.0);
    const double mean = bd.drift * 10.0;
    const double true_sd = bd.volatility * std::sqrt(10.0);
    auto samples = inverse_cdf_sample(u, mean, true_sd, 5000, 8675309);
    auto ok = validate_density(d, samples);
    CHECK(ok.n == 5000);
    CHECK(ok.threshold == doctest::Approx(1.63 / std::sqrt(5000.0)));
    CHECK(ok.pass);
    CHECK(ok.ks < ok.threshold);

    // Shift the sampled mean by half a standard deviation: KS rises to
    // about 0.1 and the check must fail decisively.
    auto shifted = inverse_cdf_sample(u, mean + 0.5 * true_sd, true_sd, 5000,
                                      8675309);
    auto bad = validate_density(d, shifted);
    CHECK_FALSE(bad.pass);
    CHECK(bad.ks > 3.0 * bad.threshold);
}

TEST_CASE("printed variance convention fails against Brownian samples") {
    auto u = exp_utility();
    const BrownianDrift bd{0.5, 1.0};
    const double x0 = 3.5, t = 5.0;
    const double mean = u.value(x0) + bd.drift * t;
    auto samples =
        inverse_cdf_sample(u, mean, bd.volatility * std::sqrt(t), 5000, 424242);
    auto brownian = validate_density(wealth_density(u, bd, x0, t), samples);
    CHECK(brownian.pass);
    auto printed = validate_density(
        wealth_density(u, bd, x0, t, VarianceConvention::printed_t_squared),
        samples);
    CHECK_FALSE(printed.pass);
    CHECK(printed.ks > 0.1);
}

TEST_CASE("simulated terminal wealth matches the implied density") {
    // End to end: Euler paths of the generated dynamic, law checked against
    // the pushforward density. Discretization bias at this dt sits far
    // below the KS resolution.
    auto u = log_utility();
    const BrownianDrift bd{0.05, 0.2};
    auto p = dynamic_from_utility(u, bd, 1.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    cfg.n_paths = 20000;
    cfg.seed = 1906;
    auto term = simulate_terminal(p, cfg);
    std::vector<double> xs;
    xs.reserve(term.terminal.size());
    for (double x : term.terminal)
        if (std::isfinite(x)) xs.push_back(x);
    REQUIRE(xs.size() == 20000);
    auto check = validate_density(wealth_density(u, bd, 1.0, 1.0), xs);
    CHECK(check.pass);
}

TEST_CASE("density validation rejects unusable samples") {
    auto d = wealth_density(log_utility(), {0.05, 0.2}, 1.0, 10.0);
    CHECK_THROWS_AS(validate_density(d, std::vector<double>(999, 1.0)),
                    validation_error);
    std::vector<double> with_outside(2000, 1.0);
    with_outside[77] = -0.5;
    CHECK_THROWS_AS(validate_density(d, with_outside), validation_error);
    std::vector<double> with_nan(2000, 1.0);
    with_nan[3] = NAN;
    CHECK_THROWS_AS(validate_density(d, with_nan), validation_error);
}

TEST_CASE("density CSV is stable and exact") {
    auto d = utility_density({0.0, 1.0}, 0.0, 1.0);
    std::ostringstream os;
    write_density_csv(os, d, {-1.0, 0.0, 1.0});
    const double peak = 1.0 / std::sqrt(2.0 * M_PI);
    const double side = peak * std::exp(-0.5);
    // Values are written in shortest round-trip form, so parse the rows
    // back and compare the doubles bit for bit.
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,pdf");
    double x, v;
    char comma;
    in >> x >> comma >> v;
    CHECK(x == -1.0);
    CHECK(v == side);
    in >> x >> comma >> v;
    CHECK(x == 0.0);
    CHECK(v == peak);

    std::ostringstream empty_os;
    CHECK_THROWS_AS(write_density_csv(empty_os, d, {}), validation_error);
    CHECK_THROWS_AS(write_density_csv(empty_os, d, {NAN}), validation_error);
}
