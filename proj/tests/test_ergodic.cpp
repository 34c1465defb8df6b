#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "ergo/duality.hpp"
#include "ergo/errors.hpp"
#include "ergo/ergodic.hpp"
#include "ergo/expr.hpp"
#include "ergo/functions.hpp"
#include "ergo/numeric/normal.hpp"
#include "ergo/numeric/philox.hpp"
#include "ergo/numeric/stats.hpp"
#include "ergo/sde.hpp"

using namespace ergo;

TEST_CASE("time average of a zero-noise path is exact") {
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.horizon = 100.0;
    auto res = simulate(additive_dynamic(0.5, 0.0, 1.0), cfg);
    REQUIRE(res.paths.size() == 1);
    auto g = time_average_rate(transform_path(res.paths[0], linear_utility()), 1.0);
    CHECK(g.rate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.std_error < 1e-10);
    CHECK(g.method == RateMethod::time_average);
    CHECK(g.n == 100);
    CHECK(g.delta_t == doctest::Approx(1.0));
}

TEST_CASE("time average partitioning and validation") {
    SamplePath path{0.0, 0.5, std::vector<double>(41, 0.0)};
    for (std::size_t k = 0; k < 41; ++k) path.values[k] = 0.25 * double(k);
    // 40 steps of 0.5 make 20 blocks of 1.0; rate is 0.5 utils per time.
    auto g = time_average_rate(path, 1.0);
    CHECK(g.rate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.n == 20);
    // Tail past the last full block is dropped: 13 blocks of 1.5.
    CHECK(time_average_rate(path, 1.5).n == 13);
    CHECK_THROWS_AS(time_average_rate(path, 0.1), validation_error);
    CHECK_THROWS_AS(time_average_rate(path, 0.75), validation_error);
    CHECK_THROWS_AS(time_average_rate(path, 4.0), validation_error);  // M = 5
}

TEST_CASE("time average of the exponential-decay pair finds the utility drift") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 1e4;
    cfg.seed = 2024;
    auto res = simulate(exp_test_dynamic(0.5, 1.0, 2.5), cfg);
    REQUIRE(res.paths.size() == 1);
    auto g = time_average_rate(transform_path(res.paths[0], exp_utility()), 1.0);
    // Brownian standard error over this horizon is b_u / sqrt(T) = 0.01.
    CHECK(std::fabs(g.rate - 0.5) < 0.03);
    CHECK(g.std_error > 0.007);
    CHECK(g.std_error < 0.013);
    CHECK(g.n == 10000);
}

TEST_CASE("log view of GBM grows at the Ito rate") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 2000.0;
    cfg.seed = 77;
    auto res = simulate(gbm_dynamic(0.05, 0.2, 1.0), cfg);
    auto g = time_average_rate(transform_path(res.paths[0], log_utility()), 1.0);
    CHECK(std::fabs(g.rate - 0.03) < 0.0135);  // 3 x sigma / sqrt(T)
    CHECK(g.std_error > 0.003);
    CHECK(g.std_error < 0.006);
}

TEST_CASE("ensemble average of plain increments") {
    SUBCASE("constant increments have zero error") {
        std::vector<double> inc(50, 0.7);
        auto g = ensemble_average_rate(inc, 0.5);
        CHECK(g.rate == doctest::Approx(1.4).epsilon(1e-12));
        CHECK(g.std_error == 0.0);
        CHECK(g.method == RateMethod::ensemble_average);
        CHECK(g.n == 50);
    }
    SUBCASE("directly sampled Brownian increments") {
        const counter_stream rng(123, 0);
        std::vector<double> inc(100000);
        for (std::size_t i = 0; i < inc.size(); ++i)
            inc[i] = 0.5 + normal_quantile(rng.uniform_at(i));
        auto g = ensemble_average_rate(inc, 1.0);
        CHECK(std::fabs(g.rate - 0.5) < 3.0 / std::sqrt(100000.0));
        CHECK(g.std_error == doctest::Approx(1.0 / std::sqrt(100000.0)).epsilon(0.05));
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(ensemble_average_rate({1.0}, 1.0), validation_error);
        CHECK_THROWS_AS(ensemble_average_rate({1.0, 2.0}, 0.0), validation_error);
        CHECK_THROWS_AS(ensemble_average_rate({1.0, NAN}, 1.0), validation_error);
    }
    SUBCASE("per-increment spans must agree") {
        const std::vector<double> inc{0.1, 0.2, 0.3};
        auto g = ensemble_average_rate(inc, {0.5, 0.5, 0.5});
        CHECK(g.rate == doctest::Approx(0.4));
        CHECK_THROWS_AS(ensemble_average_rate(inc, {0.5, 0.5, 0.25}),
                        validation_error);
        CHECK_THROWS_AS(ensemble_average_rate(inc, {0.5, 0.5}), validation_error);
    }
}

TEST_CASE("ergodicity check passes for a generated pair") {
    auto p = dynamic_from_utility(log_utility(), {0.05, 0.2}, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 2000.0;
    cfg.n_paths = 20000;
    cfg.seed = 404;
    auto rep = ergodicity_check(p, log_utility(), cfg, 1.0);
    CHECK(rep.compatible);
    CHECK(std::fabs(rep.time_rate.rate - 0.05) < 0.015);
    CHECK(std::fabs(rep.ensemble_rate.rate - 0.05) < 0.005);
    CHECK(rep.combined_std_error > 0.0);
    CHECK(rep.time_rate.method == RateMethod::time_average);
    CHECK(rep.ensemble_rate.method == RateMethod::ensemble_average);
    CHECK(rep.ensemble_rate.n == 20000);

    // Same config gives the identical report; the legs are sub-seeded.
    auto rep2 = ergodicity_check(p, log_utility(), cfg, 1.0);
    CHECK(std::memcmp(&rep.time_rate.rate, &rep2.time_rate.rate,
                      sizeof(double)) == 0);
    CHECK(std::memcmp(&rep.ensemble_rate.rate, &rep2.ensemble_rate.rate,
                      sizeof(double)) == 0);
}

TEST_CASE("ergodicity check passes for wealth itself under additive dynamics") {
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.horizon = 1000.0;
    cfg.n_paths = 10000;
    cfg.seed = 505;
    auto rep =
        ergodicity_check(additive_dynamic(0.3, 0.7, 1.0), linear_utility(), cfg, 1.0);
    CHECK(rep.compatible);
    CHECK(std::fabs(rep.time_rate.rate - 0.3) < 0.07);
    CHECK(std::fabs(rep.ensemble_rate.rate - 0.3) < 0.025);
}

TEST_CASE("raw wealth of GBM is not an ergodic observable") {
    // Expectation growth compounds at mu while a single trajectory grows at
    // mu - sigma^2/2, so the time average runs far above the ensemble rate
    // measured over one short span.
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 10.0;
    cfg.n_paths = 10000;
    cfg.seed = 606;
    auto rep =
        ergodicity_check(gbm_dynamic(1.0, 0.1, 1.0), linear_utility(), cfg, 0.1);
    CHECK_FALSE(rep.compatible);
    CHECK(rep.gap > 0.0);
    CHECK(std::fabs(rep.ensemble_rate.rate - (std::exp(0.1) - 1.0) / 0.1) < 0.02);
}

TEST_CASE("ensemble increments drop aborted paths") {
    auto p = dynamic_from_expressions(Expr::parse("0"), Expr::parse("1"),
                                      {0.0, INFINITY}, 0.1);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 1.0;
    cfg.n_paths = 200;
    cfg.seed = 9;
    cfg.boundary = BoundaryPolicy::reject_path;
    auto inc = ensemble_increments(p, linear_utility(), cfg);
    CHECK(inc.size() < 200);
    CHECK(inc.size() > 2);
}

TEST_CASE("decision between GBMs follows the closed-form dominance curve") {
    // Time-average growth rates 0.05 vs 0.01; the log-wealth difference is
    // Brownian, so P(dx > dx*) = Phi((g - g*) sqrt(dt) / hypot(sigma, sigma*)).
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto b = gbm_dynamic(0.015, 0.1, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 64.0;
    cfg.n_paths = 4000;
    cfg.seed = 20240601;
    auto r = decide(a, b, log_utility(), 0.05, cfg);

    CHECK(r.outcome == DecisionOutcome::decided);
    CHECK(r.chosen_index == 0);
    CHECK(r.chosen == a.name());
    CHECK(std::fabs(r.rate_gap - 0.04) <
          3.5 * std::hypot(r.rate.std_error, r.rate_star.std_error));
    CHECK(r.converged);
    CHECK(r.delta_t_used == doctest::Approx(64.0));
    CHECK(r.epsilon == doctest::Approx(0.05));

    REQUIRE(r.dominance.size() == 7);
    std::vector<double> spans, phats;
    for (const auto& pt : r.dominance) {
        const double z =
            0.04 * std::sqrt(pt.delta_t) / std::hypot(0.1, 0.1);
        const double oracle = normal_cdf(z);
        CAPTURE(pt.delta_t);
        CHECK(std::fabs(pt.p_hat - oracle) <
              4.0 * std::sqrt(oracle * (1.0 - oracle) / double(pt.trials)));
        spans.push_back(pt.delta_t);
        phats.push_back(pt.p_hat);
    }
    CHECK(spearman(spans, phats) > 0.9);
    CHECK(std::fabs(r.p_dominance - 0.9881) < 0.008);
}

TEST_CASE("identical processes yield no decision and even dominance") {
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto b = gbm_dynamic(0.055, 0.1, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 4.0;
    cfg.n_paths = 2000;
    cfg.seed = 314159;
    auto r = decide(a, b, log_utility(), 0.05, cfg);
    CHECK(r.outcome == DecisionOutcome::no_decision);
    CHECK(r.chosen.empty());
    CHECK(r.chosen_index == -1);
    CHECK_FALSE(r.converged);
    CHECK(std::fabs(r.p_dominance - 0.5) < 0.05);
    CHECK(std::fabs(r.rate_gap) <
          3.0 * std::hypot(r.rate.std_error, r.rate_star.std_error));
}

TEST_CASE("decision is invariant under affine utility rescaling") {
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto b = gbm_dynamic(0.015, 0.1, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 16.0;
    cfg.n_paths = 2000;
    cfg.seed = 271828;
    DecideOptions opts;
    opts.rate_horizon = 1024.0;

    auto base = decide(a, b, log_utility(), 0.05, cfg, opts);
    auto scaled = decide(
        a, b,
        utility_from_expression(Expr::parse("2*ln(x) + 3"), {0.0, INFINITY}),
        0.05, cfg, opts);

    CHECK(base.outcome == DecisionOutcome::decided);
    CHECK(scaled.outcome == base.outcome);
    CHECK(scaled.chosen_index == base.chosen_index);
    CHECK(scaled.delta_t_used == base.delta_t_used);
    // The dominance ladder compares raw wealth: identical seeds, identical
    // bits, whatever the utility gauge.
    REQUIRE(scaled.dominance.size() == base.dominance.size());
    for (std::size_t i = 0; i < base.dominance.size(); ++i) {
        CHECK(scaled.dominance[i].successes == base.dominance[i].successes);
        CHECK(scaled.dominance[i].trials == base.dominance[i].trials);
    }
    // Rates pick up the factor 2; the comparison outcome cannot move.
    CHECK(scaled.rate.rate == doctest::Approx(2.0 * base.rate.rate).epsilon(1e-9));
    CHECK(scaled.rate_gap == doctest::Approx(2.0 * base.rate_gap).epsilon(1e-9));
}

TEST_CASE("decision is antisymmetric under argument swap") {
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto b = gbm_dynamic(0.015, 0.1, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 16.0;
    cfg.n_paths = 2000;
    cfg.seed = 161803;
    DecideOptions opts;
    opts.rate_horizon = 1024.0;

    auto ab = decide(a, b, log_utility(), 0.05, cfg, opts);
    auto ba = decide(b, a, log_utility(), 0.05, cfg, opts);
    CHECK(ab.chosen_index == 0);
    CHECK(ba.chosen_index == 1);  // the same process, now in the other slot
    CHECK(std::fabs(ab.rate_gap + ba.rate_gap) <
          3.5 * std::hypot(std::hypot(ab.rate.std_error, ab.rate_star.std_error),
                           std::hypot(ba.rate.std_error, ba.rate_star.std_error)));
    CHECK(std::fabs(ab.p_dominance + ba.p_dominance - 1.0) < 0.045);
}

TEST_CASE("decide validates its arguments") {
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto b = gbm_dynamic(0.015, 0.1, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 4.0;
    cfg.n_paths = 100;
    CHECK_THROWS_AS(decide(a, b, log_utility(), 0.0, cfg), validation_error);
    CHECK_THROWS_AS(decide(a, b, log_utility(), 1.0, cfg), validation_error);
    SimConfig tiny = cfg;
    tiny.horizon = 0.5;
    CHECK_THROWS_AS(decide(a, b, log_utility(), 0.05, tiny), validation_error);
}

TEST_CASE("family precheck and the pure-simulation escape hatch") {
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto other = additive_dynamic(0.01, 0.05, 50.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 4.0;
    cfg.n_paths = 500;
    cfg.seed = 42;
    // Additive dynamics are not generated by log utility: u' b_x varies.
    CHECK_THROWS_AS(decide(a, other, log_utility(), 0.05, cfg),
                    inconsistency_error);

    DecideOptions opts;
    opts.require_consistent = false;
    opts.rate_horizon = 512.0;
    auto r = decide(a, other, log_utility(), 0.05, cfg, opts);
    CHECK(r.outcome == DecisionOutcome::decided);
    CHECK(r.chosen_index == 0);
}

TEST_CASE("dominance curve stands alone") {
    auto a = gbm_dynamic(0.055, 0.1, 1.0);
    auto b = gbm_dynamic(0.015, 0.1, 1.0);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.n_paths = 2000;
    cfg.seed = 112233;
    auto curve = dominance_curve(a, b, {1.0, 4.0, 16.0}, cfg);
    REQUIRE(curve.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(curve[i].trials == 2000);
        CHECK(curve[i].p_hat >= 0.0);
        CHECK(curve[i].p_hat <= 1.0);
    }
    CHECK(curve[0].p_hat < curve[2].p_hat);
    CHECK_THROWS_AS(dominance_curve(a, b, {}, cfg), validation_error);
    CHECK_THROWS_AS(dominance_curve(a, b, {0.001}, cfg), validation_error);

    // Common noise pins the comparison to one shared draw sequence.
    auto cn = dominance_curve(a, b, {1.0}, cfg, true);
    CHECK(cn[0].p_hat > 0.9);  // same z, higher drift wins almost surely
}

TEST_CASE("growth estimates respect the scale of the utility gauge") {
    // lambda u + c multiplies every rate and error by lambda.
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 200.0;
    cfg.seed = 888;
    auto res = simulate(gbm_dynamic(0.05, 0.2, 1.0), cfg);
    auto g1 = time_average_rate(transform_path(res.paths[0], log_utility()), 1.0);
    auto u2 =
        utility_from_expression(Expr::parse("2*ln(x) + 3"), {0.0, INFINITY});
    auto g2 = time_average_rate(transform_path(res.paths[0], u2), 1.0);
    CHECK(g2.rate == doctest::Approx(2.0 * g1.rate).epsilon(1e-9));
    CHECK(g2.std_error == doctest::Approx(2.0 * g1.std_error).epsilon(1e-9));
}
