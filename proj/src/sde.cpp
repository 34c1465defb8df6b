#include "ergo/sde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <utility>

#include "ergo/errors.hpp"
#include "ergo/numeric/format.hpp"
#include "ergo/numeric/normal.hpp"
#include "ergo/numeric/philox.hpp"

namespace ergo {

void SamplePath::validate() const {
    if (!(dt > 0.0)) throw validation_error("path dt must be positive");
    if (values.size() < 2) throw validation_error("path needs at least 2 values");
    for (double v : values)
        if (!std::isfinite(v)) throw validation_error("path value not finite");
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw validation_error("simulation dt must be positive");
    if (!(horizon >= dt))
        throw validation_error("simulation horizon must be at least one step");
    if (n_paths < 1) throw validation_error("simulation needs at least one path");
    if (threads < 1) throw validation_error("simulation needs at least one thread");
}

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

namespace {

struct path_accum {
    std::vector<PathIncident> incidents;
    std::size_t reflections = 0;
};

double resolve_epsilon(const SimConfig& cfg, const ItoProcess& p) {
    if (cfg.boundary_epsilon > 0.0) return cfg.boundary_epsilon;
    return 1e-12 * (1.0 + std::fabs(p.initial_wealth()));
}

// One Euler-Maruyama path; states stream through sink(k, x) for
// k = 0..n_steps. Returns false when the path aborts.
template <typename Sink>
bool run_path(const ItoProcess& p, const SimConfig& cfg, double eps,
              std::size_t index, std::size_t n_steps, path_accum& acc,
              Sink&& sink) {
    const Interval dom = p.domain();
    const bool lo_finite = std::isfinite(dom.lo);
    const bool hi_finite = std::isfinite(dom.hi);
    const counter_stream rng(cfg.seed, index);
    const double sqdt = std::sqrt(cfg.dt);
    double x = p.initial_wealth();
    sink(std::size_t{0}, x);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double z = normal_quantile(rng.uniform_at(k));
        x = x + p.drift(x) * cfg.dt + p.diffusion(x) * sqdt * z;
        if (lo_finite && x < dom.lo + eps) {
            if (cfg.boundary == BoundaryPolicy::reject_path) {
                acc.incidents.push_back(
                    {index, k + 1, PathIncident::Kind::rejected_at_boundary});
                return false;
            }
            x = 2.0 * (dom.lo + eps) - x;
            ++acc.reflections;
        }
        if (hi_finite && x > dom.hi - eps) {
            if (cfg.boundary == BoundaryPolicy::reject_path) {
                acc.incidents.push_back(
                    {index, k + 1, PathIncident::Kind::rejected_at_boundary});
                return false;
            }
            x = 2.0 * (dom.hi - eps) - x;
            ++acc.reflections;
        }
        if (!std::isfinite(x) || (lo_finite && x < dom.lo) ||
            (hi_finite && x > dom.hi)) {
            acc.incidents.push_back(
                {index, k + 1, PathIncident::Kind::non_finite_state});
            return false;
        }
        sink(k + 1, x);
    }
    return true;
}

// Runs f(lo, hi, slot) over a static partition of [0, n_paths). Slots are
// merged in partition order so the result is independent of scheduling.
template <typename Work>
void partition_paths(std::size_t n_paths, unsigned threads, Work&& work) {
    const unsigned t = std::min<std::size_t>(threads, n_paths);
    if (t <= 1) {
        work(std::size_t{0}, n_paths, 0u);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    const std::size_t chunk = (n_paths + t - 1) / t;
    for (unsigned i = 0; i < t; ++i) {
        const std::size_t lo = i * chunk;
        const std::size_t hi = std::min(n_paths, lo + chunk);
        pool.emplace_back([&, lo, hi, i] {
            try {
                work(lo, hi, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

SimResult simulate(const ItoProcess& p, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n_steps = cfg.steps();
    const double eps = resolve_epsilon(cfg, p);
    const unsigned t =
        static_cast<unsigned>(std::min<std::size_t>(cfg.threads, cfg.n_paths));
    std::vector<std::vector<double>> slots(cfg.n_paths);
    std::vector<path_accum> accums(std::max(t, 1u));

    partition_paths(cfg.n_paths, cfg.threads,
                    [&](std::size_t lo, std::size_t hi, unsigned slot) {
                        path_accum& acc = accums[slot];
                        for (std::size_t i = lo; i < hi; ++i) {
                            std::vector<double> values;
                            values.reserve(n_steps + 1);
                            const bool ok = run_path(
                                p, cfg, eps, i, n_steps, acc,
                                [&](std::size_t, double x) { values.push_back(x); });
                            if (ok) slots[i] = std::move(values);
                        }
                    });

    SimResult result;
    result.paths.reserve(cfg.n_paths);
    for (auto& values : slots)
        if (!values.empty())
            result.paths.push_back(SamplePath{0.0, cfg.dt, std::move(values)});
    for (auto& acc : accums) {
        result.incidents.insert(result.incidents.end(), acc.incidents.begin(),
                                acc.incidents.end());
        result.reflections += acc.reflections;
    }
    return result;
}

TerminalResult simulate_terminal(const ItoProcess& p, const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n_steps = cfg.steps();
    const double eps = resolve_epsilon(cfg, p);
    const unsigned t =
        static_cast<unsigned>(std::min<std::size_t>(cfg.threads, cfg.n_paths));
    TerminalResult result;
    result.terminal.assign(cfg.n_paths,
                           std::numeric_limits<double>::quiet_NaN());
    std::vector<path_accum> accums(std::max(t, 1u));

    partition_paths(cfg.n_paths, cfg.threads,
                    [&](std::size_t lo, std::size_t hi, unsigned slot) {
                        path_accum& acc = accums[slot];
                        for (std::size_t i = lo; i < hi; ++i) {
                            double last = 0.0;
                            const bool ok =
                                run_path(p, cfg, eps, i, n_steps, acc,
                                         [&](std::size_t, double x) { last = x; });
                            if (ok) result.terminal[i] = last;
                        }
                    });

    for (auto& acc : accums) {
        result.incidents.insert(result.incidents.end(), acc.incidents.begin(),
                                acc.incidents.end());
        result.reflections += acc.reflections;
    }
    return result;
}

SamplePath transform_path(const SamplePath& path, const UtilityFunction& u) {
    path.validate();
    SamplePath out;
    out.t0 = path.t0;
    out.dt = path.dt;
    out.values.reserve(path.values.size());
    const Interval dom = u.domain();
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        const double x = path.values[k];
        if (!dom.contains(x))
            throw math_error("path value " + format_double(x) + " at step " +
                             std::to_string(k) + " is outside the utility domain");
        out.values.push_back(u.value(x));
    }
    return out;
}

void write_path_csv(std::ostream& os, const SamplePath& path) {
    path.validate();
    os << "t,value\n";
    for (std::size_t k = 0; k < path.values.size(); ++k)
        os << format_double(path.time(k)) << ',' << format_double(path.values[k])
           << '\n';
}

void write_ensemble_csv(std::ostream& os, const std::vector<SamplePath>& paths) {
    if (paths.empty()) throw validation_error("ensemble CSV needs paths");
    const std::size_t len = paths[0].values.size();
    for (const auto& p : paths) {
        p.validate();
        if (p.values.size() != len || p.t0 != paths[0].t0 || p.dt != paths[0].dt)
            throw validation_error("ensemble CSV needs a common time grid");
    }
    os << 't';
    for (std::size_t i = 0; i < paths.size(); ++i) os << ",path_" << i;
    os << '\n';
    for (std::size_t k = 0; k < len; ++k) {
        os << format_double(paths[0].time(k));
        for (const auto& p : paths) os << ',' << format_double(p.values[k]);
        os << '\n';
    }
}

}  // namespace ergo
