#include "ergo/ergodic.hpp"

#include <cmath>
#include <cstdlib>

#include "ergo/duality.hpp"
#include "ergo/errors.hpp"
#include "ergo/numeric/format.hpp"
#include "ergo/numeric/philox.hpp"
#include "ergo/numeric/stats.hpp"

namespace ergo {

namespace {

// Sub-seed salts. Every independent randomness consumer gets its own.
constexpr std::uint64_t salt_time_leg = 1;
constexpr std::uint64_t salt_ensemble_leg = 2;
constexpr std::uint64_t salt_rate_leg_p = 11;
constexpr std::uint64_t salt_rate_leg_p_star = 12;
constexpr std::uint64_t salt_ladder = 1000;

GrowthEstimate estimate_from(std::vector<double> rates, RateMethod method,
                             double delta_t, double scale) {
    auto m = moments(rates);
    GrowthEstimate g;
    g.rate = m.mean / scale;
    g.std_error = m.std_error() / scale;
    g.method = method;
    g.delta_t = delta_t;
    g.n = rates.size();
    return g;
}

}  // namespace

GrowthEstimate time_average_rate(const SamplePath& u_path, double block_dt) {
    u_path.validate();
    if (!(block_dt >= u_path.dt))
        throw validation_error("block length is below the path resolution");
    const auto s = static_cast<std::size_t>(std::llround(block_dt / u_path.dt));
    if (std::fabs(double(s) * u_path.dt - block_dt) > 1e-9 * block_dt)
        throw validation_error("block length must be a whole number of steps");
    const std::size_t blocks = u_path.steps() / s;
    if (blocks < 10)
        throw validation_error("time average needs at least 10 blocks, got " +
                               std::to_string(blocks));
    const double span = double(s) * u_path.dt;
    std::vector<double> rates(blocks);
    for (std::size_t m = 0; m < blocks; ++m)
        rates[m] = u_path.values[(m + 1) * s] - u_path.values[m * s];
    return estimate_from(std::move(rates), RateMethod::time_average, span, span);
}

GrowthEstimate ensemble_average_rate(const std::vector<double>& u_increments,
                                     double delta_t) {
    if (u_increments.size() < 2)
        throw validation_error("ensemble average needs at least 2 increments");
    if (!(delta_t > 0.0))
        throw validation_error("increment span must be positive");
    for (double d : u_increments)
        if (!std::isfinite(d))
            throw validation_error("ensemble increment not finite");
    return estimate_from(u_increments, RateMethod::ensemble_average, delta_t,
                         delta_t);
}

GrowthEstimate ensemble_average_rate(const std::vector<double>& u_increments,
                                     const std::vector<double>& delta_ts) {
    if (delta_ts.size() != u_increments.size())
        throw validation_error("one span per increment required");
    for (double d : delta_ts)
        if (d != delta_ts.front())
            throw validation_error(
                "mismatched increment spans; the ensemble average is defined "
                "at one fixed delta_t");
    if (delta_ts.empty()) throw validation_error("no increments supplied");
    return ensemble_average_rate(u_increments, delta_ts.front());
}

std::vector<double> ensemble_increments(const ItoProcess& p,
                                        const UtilityFunction& u,
                                        const SimConfig& cfg) {
    auto res = simulate_terminal(p, cfg);
    const double u0 = u.value(p.initial_wealth());
    std::vector<double> inc;
    inc.reserve(res.terminal.size());
    for (double xt : res.terminal)
        if (!std::isnan(xt)) inc.push_back(u.value(xt) - u0);
    if (inc.size() < 2)
        throw math_error("ensemble collapsed: " +
                         std::to_string(res.incidents.size()) +
                         " of " + std::to_string(cfg.n_paths) + " paths aborted");
    return inc;
}

ErgodicityReport ergodicity_check(const ItoProcess& p, const UtilityFunction& u,
                                  const SimConfig& cfg, double block_dt) {
    cfg.validate();

    SimConfig time_cfg = cfg;
    time_cfg.n_paths = 1;
    time_cfg.seed = derive_seed(cfg.seed, salt_time_leg);
    auto sim = simulate(p, time_cfg);
    if (sim.paths.empty())
        throw math_error("time-average path aborted at step " +
                         std::to_string(sim.incidents.empty()
                                            ? std::size_t{0}
                                            : sim.incidents[0].step));

    ErgodicityReport report;
    report.time_rate =
        time_average_rate(transform_path(sim.paths[0], u), block_dt);

    SimConfig ens_cfg = cfg;
    ens_cfg.horizon = block_dt;
    ens_cfg.seed = derive_seed(cfg.seed, salt_ensemble_leg);
    report.ensemble_rate =
        ensemble_average_rate(ensemble_increments(p, u, ens_cfg), block_dt);

    report.gap = report.time_rate.rate - report.ensemble_rate.rate;
    report.combined_std_error =
        std::hypot(report.time_rate.std_error, report.ensemble_rate.std_error);
    report.compatible =
        std::fabs(report.gap) <= 3.0 * report.combined_std_error;
    return report;
}

namespace {

// One ladder rung: paired terminal ensembles, strict-win counts both ways.
struct rung_counts {
    std::size_t wins = 0;       // dx > dx*
    std::size_t wins_star = 0;  // dx* > dx
    std::size_t trials = 0;
};

rung_counts run_rung(const ItoProcess& p, const ItoProcess& p_star,
                     double delta_t, const SimConfig& cfg, std::uint64_t seed,
                     bool common_noise) {
    SimConfig rung_cfg = cfg;
    rung_cfg.horizon = delta_t;
    rung_cfg.seed = derive_seed(seed, 1);
    auto a = simulate_terminal(p, rung_cfg);
    rung_cfg.seed = common_noise ? derive_seed(seed, 1) : derive_seed(seed, 2);
    auto b = simulate_terminal(p_star, rung_cfg);

    rung_counts c;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        if (std::isnan(a.terminal[i]) || std::isnan(b.terminal[i])) continue;
        const double dx = a.terminal[i] - p.initial_wealth();
        const double dx_star = b.terminal[i] - p_star.initial_wealth();
        ++c.trials;
        if (dx > dx_star) ++c.wins;
        if (dx_star > dx) ++c.wins_star;
    }
    if (c.trials < 2)
        throw math_error("dominance ensemble collapsed at delta_t " +
                         format_double(delta_t));
    return c;
}

// A process belongs to u's family when u' b_x is one constant (that
// constant is b_u) and the drift satisfies the consistency identity.
void require_family(const ItoProcess& p, const UtilityFunction& u) {
    auto rep = check_consistency(p);
    if (!rep.consistent)
        throw inconsistency_error(p.name() +
                                  " admits no generating utility at all");
    std::vector<double> scale;
    scale.reserve(rep.ratios.size());
    for (auto [x, rho] : rep.ratios) {
        if (!u.domain().contains(x))
            throw inconsistency_error(
                p.name() + " runs on a different domain than the utility");
        scale.push_back(u.derivative(x) * p.diffusion(x));
    }
    const double med = median(scale);
    for (double c : scale)
        if (std::fabs(c - med) > 1e-6 * (1.0 + std::fabs(med)))
            throw inconsistency_error(
                p.name() + " is not generated by the supplied utility (u' b_x "
                           "varies across the domain)");
}

GrowthEstimate rate_leg(const ItoProcess& p, const UtilityFunction& u,
                        const SimConfig& cfg, const DecideOptions& opts,
                        std::uint64_t salt) {
    SimConfig leg = cfg;
    leg.n_paths = 1;
    leg.horizon = opts.rate_horizon;
    leg.seed = derive_seed(cfg.seed, salt);
    auto sim = simulate(p, leg);
    if (sim.paths.empty())
        throw math_error("rate leg for " + p.name() + " aborted");
    return time_average_rate(transform_path(sim.paths[0], u),
                             opts.rate_block_dt);
}

}  // namespace

std::vector<DominancePoint> dominance_curve(const ItoProcess& p,
                                            const ItoProcess& p_star,
                                            const std::vector<double>& delta_ts,
                                            const SimConfig& cfg,
                                            bool common_noise) {
    cfg.validate();
    if (delta_ts.empty()) throw validation_error("no delta_t values supplied");
    std::vector<DominancePoint> curve;
    curve.reserve(delta_ts.size());
    for (std::size_t r = 0; r < delta_ts.size(); ++r) {
        if (!(delta_ts[r] >= cfg.dt))
            throw validation_error("delta_t below the integration step");
        const auto c = run_rung(p, p_star, delta_ts[r], cfg,
                                derive_seed(cfg.seed, salt_ladder + r),
                                common_noise);
        curve.push_back({delta_ts[r], double(c.wins) / double(c.trials),
                         c.wins, c.trials});
    }
    return curve;
}

DecisionResult decide(const ItoProcess& p, const ItoProcess& p_star,
                      const UtilityFunction& u, double epsilon,
                      const SimConfig& cfg, const DecideOptions& opts) {
    cfg.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw validation_error("epsilon must lie in (0, 1)");
    if (!(cfg.horizon >= 1.0))
        throw validation_error("dominance ladder starts at delta_t 1; horizon "
                               "must be at least 1");
    if (opts.require_consistent) {
        require_family(p, u);
        require_family(p_star, u);
    }

    DecisionResult result;
    result.epsilon = epsilon;
    result.rate = rate_leg(p, u, cfg, opts, salt_rate_leg_p);
    result.rate_star = rate_leg(p_star, u, cfg, opts, salt_rate_leg_p_star);
    result.rate_gap = result.rate.rate - result.rate_star.rate;
    const double combined =
        std::hypot(result.rate.std_error, result.rate_star.std_error);
    const bool separated = std::fabs(result.rate_gap) > 3.0 * combined;
    const bool p_leads = result.rate_gap > 0.0;

    std::size_t rung = 0;
    bool any_cleared = false;
    for (double span = 1.0; span <= cfg.horizon * (1.0 + 1e-12); span *= 2.0) {
        const auto c = run_rung(p, p_star, span, cfg,
                                derive_seed(cfg.seed, salt_ladder + rung),
                                opts.common_noise);
        const double p_hat = double(c.wins) / double(c.trials);
        result.dominance.push_back({span, p_hat, c.wins, c.trials});
        // Convergence is judged on the rate-preferred side's win proportion.
        const std::size_t lead_wins = p_leads ? c.wins : c.wins_star;
        if (wilson_interval(lead_wins, c.trials).lower > 1.0 - epsilon) {
            any_cleared = true;
            result.p_dominance = p_hat;
            result.delta_t_used = span;
        }
        ++rung;
    }
    result.converged = any_cleared;
    if (!any_cleared) {
        result.p_dominance = result.dominance.back().p_hat;
        result.delta_t_used = result.dominance.back().delta_t;
    }
    if (separated) {
        result.outcome = DecisionOutcome::decided;
        result.chosen = p_leads ? p.name() : p_star.name();
        result.chosen_index = p_leads ? 0 : 1;
    } else {
        result.outcome = DecisionOutcome::no_decision;
    }
    return result;
}

}  // namespace ergo
