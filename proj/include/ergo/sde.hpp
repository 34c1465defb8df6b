#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ergo/functions.hpp"

namespace ergo {

// Discretized trajectory: values[k] is the state at t0 + k * dt.
struct SamplePath {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    double time(std::size_t k) const { return t0 + double(k) * dt; }
    std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
    double horizon() const { return double(steps()) * dt; }
    void validate() const;  // dt > 0, length >= 2, all values finite
};

enum class Scheme { euler_maruyama };

// Discretization can overshoot a boundary the continuous process never
// reaches. reflect_at_epsilon folds the overshoot back just inside the
// domain; reject_path aborts and reports the path instead.
enum class BoundaryPolicy { reflect_at_epsilon, reject_path };

struct SimConfig {
    double dt = 0.01;
    double horizon = 1.0;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::euler_maruyama;
    BoundaryPolicy boundary = BoundaryPolicy::reflect_at_epsilon;
    double boundary_epsilon = 0.0;  // <= 0 means 1e-12 * (1 + |x0|)
    unsigned threads = 1;

    void validate() const;
    std::size_t steps() const;  // horizon / dt rounded to nearest
};

// A path that could not be carried to the horizon: it stepped across the
// domain boundary under reject_path, or its state stopped being finite.
struct PathIncident {
    enum class Kind { rejected_at_boundary, non_finite_state };
    std::size_t path = 0;
    std::size_t step = 0;
    Kind kind = Kind::non_finite_state;
};

struct SimResult {
    std::vector<SamplePath> paths;        // completed paths, in path order
    std::vector<PathIncident> incidents;  // aborted paths, in path order
    std::size_t reflections = 0;
};

// Endpoint-only ensemble for large n_paths: terminal[i] is path i's state
// at the horizon, NaN if the path aborted. Bit-identical to the endpoints
// simulate would produce for the same config.
struct TerminalResult {
    std::vector<double> terminal;
    std::vector<PathIncident> incidents;
    std::size_t reflections = 0;
};

// Euler-Maruyama with one counter-based stream per path index, so results
// do not depend on thread count or call order.
SimResult simulate(const ItoProcess& p, const SimConfig& cfg);
TerminalResult simulate_terminal(const ItoProcess& p, const SimConfig& cfg);

// Pointwise utility of a wealth path; same time grid.
SamplePath transform_path(const SamplePath& path, const UtilityFunction& u);

// CSV wire format: "t,value" for one path, "t,path_0,...,path_{n-1}" for
// an ensemble on a common grid.
void write_path_csv(std::ostream& os, const SamplePath& path);
void write_ensemble_csv(std::ostream& os, const std::vector<SamplePath>& paths);

}  // namespace ergo
