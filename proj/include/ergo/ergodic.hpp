#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ergo/functions.hpp"
#include "ergo/sde.hpp"

namespace ergo {

enum class RateMethod { time_average, ensemble_average };

struct GrowthEstimate {
    double rate = 0.0;       // utils per unit time
    double std_error = 0.0;
    RateMethod method = RateMethod::time_average;
    double delta_t = 0.0;    // block length or increment span
    std::size_t n = 0;       // blocks (M) or realizations (N)
};

// Time-average rate from one long utility path: the path is cut into M
// non-overlapping blocks of block_dt and the block rates are averaged.
// block_dt must be a whole number of path steps; the tail past the last
// full block is dropped. Requires M >= 10.
GrowthEstimate time_average_rate(const SamplePath& u_path, double block_dt);

// Ensemble rate from independent utility increments over a common span.
GrowthEstimate ensemble_average_rate(const std::vector<double>& u_increments,
                                     double delta_t);
// Same, safeguarding a batch whose spans were recorded individually.
GrowthEstimate ensemble_average_rate(const std::vector<double>& u_increments,
                                     const std::vector<double>& delta_ts);

// Utility increments u(x(horizon)) - u(x0) from a fresh terminal ensemble;
// aborted paths are dropped.
std::vector<double> ensemble_increments(const ItoProcess& p,
                                        const UtilityFunction& u,
                                        const SimConfig& cfg);

// Both estimators on independent sub-seeded simulations: one path of
// cfg.horizon for the time average, cfg.n_paths increments of block_dt for
// the ensemble average. The two estimates are compatible when they agree
// within 3 combined standard errors; for the utility that generates the
// dynamic this is the ergodic-observable property.
struct ErgodicityReport {
    GrowthEstimate time_rate;
    GrowthEstimate ensemble_rate;
    bool compatible = false;
    double gap = 0.0;  // time rate - ensemble rate
    double combined_std_error = 0.0;
};

ErgodicityReport ergodicity_check(const ItoProcess& p, const UtilityFunction& u,
                                  const SimConfig& cfg, double block_dt = 1.0);

// One rung of the dominance ladder: paired independent terminal ensembles
// over delta_t, counting strict wealth-increment wins of p over p_star.
struct DominancePoint {
    double delta_t = 0.0;
    double p_hat = 0.0;          // estimated P(dx > dx*)
    std::size_t successes = 0;   // strict wins of p; ties count for neither
    std::size_t trials = 0;      // pairs where both paths completed
};

std::vector<DominancePoint> dominance_curve(const ItoProcess& p,
                                            const ItoProcess& p_star,
                                            const std::vector<double>& delta_ts,
                                            const SimConfig& cfg,
                                            bool common_noise = false);

enum class DecisionOutcome { decided, no_decision };

struct DecisionResult {
    DecisionOutcome outcome = DecisionOutcome::no_decision;
    std::string chosen;        // empty when no decision
    int chosen_index = -1;     // 0 = first process, 1 = second, -1 = none
    double p_dominance = 0.0;  // P(dx > dx*) at delta_t_used
    double delta_t_used = 0.0;
    double epsilon = 0.0;
    double rate_gap = 0.0;     // time-average rate of p minus p_star
    bool converged = false;    // Wilson 95% lower bound cleared 1 - epsilon
    GrowthEstimate rate, rate_star;
    std::vector<DominancePoint> dominance;
};

struct DecideOptions {
    double rate_horizon = 4096.0;  // horizon of the two time-average legs
    double rate_block_dt = 1.0;
    bool common_noise = false;       // variance-reduction extension
    bool require_consistent = true;  // precheck both against u's family
};

// Time-based criterion between two processes: ranks by u-transformed
// time-average rates, and corroborates with P(dx > dx*) on a doubling
// delta_t ladder from 1 up to cfg.horizon. p_dominance is reported at the
// largest rung whose Wilson 95% lower bound clears 1 - epsilon, else at
// the horizon with converged = false. Statistically indistinguishable
// rates give the explicit no_decision outcome rather than a pick.
DecisionResult decide(const ItoProcess& p, const ItoProcess& p_star,
                      const UtilityFunction& u, double epsilon,
                      const SimConfig& cfg, const DecideOptions& opts = {});

}  // namespace ergo
