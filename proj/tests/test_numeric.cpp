#include "doctest.h"

#include <cmath>
#include <vector>

#include "ergo/numeric/finite_diff.hpp"
#include "ergo/numeric/normal.hpp"
#include "ergo/numeric/philox.hpp"
#include "ergo/numeric/quadrature.hpp"
#include "ergo/numeric/rootfind.hpp"
#include "ergo/numeric/stats.hpp"

using namespace ergo;

TEST_CASE("normal quantile matches reference points") {
    // Reference values for the standard normal inverse CDF.
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-14));
    CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-14));
    CHECK(normal_quantile(0.3) == doctest::Approx(-0.5244005127080407).epsilon(1e-14));
}

TEST_CASE("normal quantile round-trips through the erfc-based CDF") {
    // cdf and quantile are independent implementations; agreement checks both.
    for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99,
                     0.9999, 1.0 - 1e-8}) {
        const double z = normal_quantile(p);
        CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), math_error);
    CHECK_THROWS_AS(normal_quantile(1.0), math_error);
    CHECK_THROWS_AS(normal_quantile(-0.5), math_error);
}

TEST_CASE("quadrature reproduces closed forms") {
    auto sq = [](double x) { return x * x; };
    auto r = integrate(sq, 0.0, 1.0);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // Integrable endpoint singularity. Bisection cannot shrink the singular
    // panel below a few ulps, which bounds the reachable tolerance near 1e-9.
    auto inv_sqrt = [](double x) { return 1.0 / std::sqrt(x); };
    r = integrate(inv_sqrt, 0.0, 1.0, 1e-8);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));

    // Semi-infinite, both orientations.
    r = integrate([](double x) { return std::exp(-x); }, 0.0, INFINITY);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
    r = integrate([](double x) { return std::exp(x); }, -INFINITY, 0.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

    // Doubly infinite.
    r = integrate([](double x) { return normal_pdf(x); }, -INFINITY, INFINITY);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

    // Reversed bounds flip the sign.
    r = integrate(sq, 1.0, 0.0);
    CHECK(r.value == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("quadrature breakpoints catch a narrow peak") {
    // Breakpoints must cover the full extent of the mass: a lone panel whose
    // nodes all miss the bump reports zero with zero error and is never
    // refined. Laddering them out to +-40 widths leaves no gap.
    const double center = 7.0, width = 0.01;
    auto bump = [&](double x) { return normal_pdf((x - center) / width) / width; };
    std::vector<double> breaks;
    for (double k : {-40.0, -20.0, -8.0, -3.0, 0.0, 3.0, 8.0, 20.0, 40.0})
        breaks.push_back(center + k * width);
    auto r = integrate(bump, -INFINITY, INFINITY, 1e-10, 0.0, breaks);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quadrature rejects non-finite integrands") {
    CHECK_THROWS_AS(integrate([](double x) { return 1.0 / (x - 0.5); }, 0.4999999,
                              0.5000001),
                    math_error);
}

TEST_CASE("monotone inversion") {
    auto cube = [](double x) { return x * x * x; };
    CHECK(invert_monotone(cube, 27.0, 1.0, -INFINITY, INFINITY) ==
          doctest::Approx(3.0).epsilon(1e-12));
    CHECK(invert_monotone(cube, -8.0, 1.0, -INFINITY, INFINITY) ==
          doctest::Approx(-2.0).epsilon(1e-12));

    // Roots far below the start on a domain bounded at zero; relative
    // accuracy must survive the small scale.
    auto lg = [](double x) { return std::log(x); };
    const double tiny = invert_monotone(lg, -30.0, 1.0, 0.0, INFINITY);
    CHECK(tiny == doctest::Approx(std::exp(-30.0)).epsilon(1e-10));

    CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0),
                    math_error);
    // Target outside the attainable range never brackets.
    CHECK_THROWS_AS(invert_monotone(lg, 1e9, 1.0, 0.0, INFINITY), math_error);
}

TEST_CASE("moment summary on a hand-computed sample") {
    const std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 8};
    const auto m = moments(xs);
    CHECK(m.mean == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(m.variance == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(m.skewness == doctest::Approx(0.0).epsilon(1e-15));
    // m4/m2^2 - 3 with m2 = 5.25, m4 = 48.5625
    CHECK(m.excess_kurtosis == doctest::Approx(-1.2380952380952381).epsilon(1e-12));
    CHECK_THROWS_AS(moments(std::vector<double>{1.0}), validation_error);
}

TEST_CASE("median") {
    CHECK(median(std::vector<double>{3, 1, 2}) == doctest::Approx(2.0));
    CHECK(median(std::vector<double>{4, 1, 3, 2}) == doctest::Approx(2.5));
}

TEST_CASE("wilson interval at p-hat one half") {
    const auto ci = wilson_interval(50, 100);
    CHECK(ci.lower == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(ci.upper == doctest::Approx(0.59617).epsilon(1e-4));
}

TEST_CASE("ks statistic on a tiny hand case") {
    const std::vector<double> xs = {0.1, 0.5, 0.9};
    const double d = ks_statistic(xs, [](double x) { return x; });
    CHECK(d == doctest::Approx(1.0 / 3.0 - 0.1).epsilon(1e-14));
}

TEST_CASE("spearman rank correlation") {
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> up = {10, 20, 30, 40};
    const std::vector<double> down = {5, 4, 3, 2};
    CHECK(spearman(a, up) == doctest::Approx(1.0));
    CHECK(spearman(a, down) == doctest::Approx(-1.0));
}

TEST_CASE("counter stream is deterministic and well distributed") {
    counter_stream s(42, 7);
    counter_stream same(42, 7);
    counter_stream other_stream(42, 8);
    counter_stream other_seed(43, 7);
    CHECK(s.uniform_at(0) == same.uniform_at(0));
    CHECK(s.uniform_at(123456789) == same.uniform_at(123456789));
    CHECK(s.uniform_at(0) != other_stream.uniform_at(0));
    CHECK(s.uniform_at(0) != other_seed.uniform_at(0));

    const std::size_t n = 100000;
    std::vector<double> us(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
        us[i] = s.uniform_at(i);
        CHECK(us[i] > 0.0);
        CHECK(us[i] < 1.0);
        zs[i] = normal_quantile(us[i]);
    }
    const auto mu = moments(us);
    CHECK(mu.mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(mu.variance == doctest::Approx(1.0 / 12.0).epsilon(0.05));

    const auto mz = moments(zs);
    CHECK(std::fabs(mz.mean) < 3.0 / std::sqrt(double(n)));
    CHECK(mz.variance == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::fabs(mz.skewness) < 3.0 * std::sqrt(6.0 / double(n)));
    CHECK(std::fabs(mz.excess_kurtosis) < 3.0 * std::sqrt(24.0 / double(n)));

    std::sort(zs.begin(), zs.end());
    CHECK(ks_statistic(zs, [](double z) { return normal_cdf(z); }) <
          1.63 / std::sqrt(double(n)));
}

TEST_CASE("finite differences track known derivatives") {
    auto f = [](double x) { return std::exp(2.0 * x); };
    CHECK(central_difference(f, 0.3) ==
          doctest::Approx(2.0 * std::exp(0.6)).epsilon(1e-9));
    CHECK(second_difference(f, 0.3) ==
          doctest::Approx(4.0 * std::exp(0.6)).epsilon(1e-6));
}
