#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ergo/dist.hpp"
#include "ergo/duality.hpp"
#include "ergo/ergodic.hpp"
#include "ergo/errors.hpp"
#include "ergo/functions.hpp"
#include "ergo/numeric/format.hpp"
#include "ergo/sde.hpp"
#include "ergo/spec_io.hpp"

using namespace ergo;
using ojson = nlohmann::ordered_json;

namespace {

struct Args {
    std::string utility;
    std::vector<std::string> dynamics;
    double a_u = 0.5;
    double b_u = 1.0;
    double x0 = 1.0;
    double x_ref = 1.0;
    double t = 5.0;
    double epsilon = 0.05;
    double dt = 0.01;
    double horizon = 1.0;
    double block_dt = 1.0;
    double rate_horizon = 4096.0;
    double tolerance = 1e-6;
    std::size_t paths = 1;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::size_t grid = 33;
    double lo = NAN;
    double hi = NAN;
    std::string domain;
    std::string variance = "brownian";
    std::string mode = "both";
    std::string format;
    std::string out;
    bool common_noise = false;
    bool no_precheck = false;
};

double parse_endpoint_text(const std::string& s) {
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size())
        throw validation_error("bad domain endpoint '" + s +
                               "'; use a number, -inf, or inf");
    return v;
}

SpecHints hints_from(const Args& a) {
    SpecHints hints;
    hints.x0 = a.x0;
    hints.rates = BrownianDrift{a.a_u, a.b_u};
    if (!a.domain.empty()) {
        const auto colon = a.domain.find(':');
        if (colon == std::string::npos)
            throw validation_error("--domain needs the form LO:HI");
        hints.domain = {parse_endpoint_text(a.domain.substr(0, colon)),
                        parse_endpoint_text(a.domain.substr(colon + 1))};
        if (!(hints.domain.lo < hints.domain.hi))
            throw validation_error("--domain interval is empty");
    }
    return hints;
}

SimConfig sim_from(const Args& a) {
    SimConfig cfg;
    cfg.dt = a.dt;
    cfg.horizon = a.horizon;
    cfg.n_paths = a.paths;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    return cfg;
}

// The explicit window when both bounds are given, else the sweep default.
Interval window_from(const Args& a, const ItoProcess& p) {
    const bool has_lo = std::isfinite(a.lo), has_hi = std::isfinite(a.hi);
    if (has_lo != has_hi)
        throw validation_error("--lo and --hi must be given together");
    if (has_lo) {
        if (!(a.lo < a.hi)) throw validation_error("--lo must be below --hi");
        return {a.lo, a.hi};
    }
    return default_window(p);
}

void require_format(const Args& a, std::initializer_list<const char*> allowed) {
    if (a.format.empty()) return;
    for (const char* f : allowed)
        if (a.format == f) return;
    throw validation_error("unsupported --format '" + a.format +
                           "' for this command");
}

// Whole output is built in memory first, then moved into place; an error
// can never leave a partial file behind.
void emit(const Args& a, const std::string& content) {
    if (a.out.empty()) {
        std::cout << content;
        return;
    }
    const std::string tmp = a.out + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw validation_error("cannot open " + tmp + " for writing");
        f << content;
        f.flush();
        if (!f) throw validation_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), a.out.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw validation_error("cannot move output into place: " + a.out);
    }
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson estimate_json(const GrowthEstimate& g) {
    return {{"rate", g.rate},
            {"std_error", g.std_error},
            {"method", g.method == RateMethod::time_average ? "time_average"
                                                            : "ensemble_average"},
            {"delta_t", g.delta_t},
            {"n", g.n}};
}

ojson config_json(const SimConfig& cfg) {
    return {{"dt", cfg.dt},
            {"horizon", cfg.horizon},
            {"paths", cfg.n_paths},
            {"seed", cfg.seed},
            {"threads", cfg.threads}};
}

int cmd_derive_dynamic(const Args& a) {
    require_format(a, {"json", "csv"});
    auto u = resolve_utility(a.utility, hints_from(a));
    auto p = dynamic_from_utility(u, {a.a_u, a.b_u}, a.x0);
    const auto xs = window_grid(window_from(a, p), p.domain(), a.grid);

    if (a.format == "csv") {
        std::ostringstream os;
        os << "x,drift,diffusion\n";
        for (double x : xs)
            os << format_double(x) << ',' << format_double(p.drift(x)) << ','
               << format_double(p.diffusion(x)) << '\n';
        emit(a, os.str());
        return 0;
    }
    ojson table = ojson::array();
    for (double x : xs)
        table.push_back({{"x", x},
                         {"drift", p.drift(x)},
                         {"diffusion", p.diffusion(x)}});
    ojson j{{"command", "derive-dynamic"},
            {"seed", a.seed},
            {"utility", u.name()},
            {"a_u", a.a_u},
            {"b_u", a.b_u},
            {"x0", a.x0},
            {"dynamic", p.name()},
            {"drift_formula", p.drift_formula().empty()
                                  ? ojson(nullptr)
                                  : ojson(p.drift_formula())},
            {"diffusion_formula", p.diffusion_formula().empty()
                                      ? ojson(nullptr)
                                      : ojson(p.diffusion_formula())},
            {"table", std::move(table)}};
    emit(a, dump(j));
    return 0;
}

int cmd_derive_utility(const Args& a) {
    require_format(a, {"csv", "json"});
    auto p = resolve_dynamic(a.dynamics.at(0), hints_from(a));
    auto rep = check_consistency(p, std::max<std::size_t>(a.grid, 8),
                                 a.tolerance);
    // Only the ratio a_u/b_u is observable; the requested b_u fixes the
    // scale and the inferred ratio supplies the matching drift.
    const BrownianDrift bd{rep.inferred_ratio * a.b_u, a.b_u};
    auto u = utility_from_dynamic(p, bd, a.x_ref);
    const auto xs = window_grid(window_from(a, p), p.domain(), a.grid);

    if (a.format == "json") {
        ojson table = ojson::array();
        for (double x : xs)
            table.push_back(
                {{"x", x}, {"u", u.value(x)}, {"u_prime", u.derivative(x)}});
        ojson j{{"command", "derive-utility"},
                {"seed", a.seed},
                {"dynamic", p.name()},
                {"b_u", a.b_u},
                {"a_u_inferred", bd.drift},
                {"x_ref", a.x_ref},
                {"table", std::move(table)}};
        emit(a, dump(j));
        return 0;
    }
    std::ostringstream os;
    os << "x,u,u_prime\n";
    for (double x : xs)
        os << format_double(x) << ',' << format_double(u.value(x)) << ','
           << format_double(u.derivative(x)) << '\n';
    emit(a, os.str());
    return 0;
}

int cmd_check(const Args& a) {
    require_format(a, {"json"});
    auto p = resolve_dynamic(a.dynamics.at(0), hints_from(a));
    std::optional<Interval> window;
    if (std::isfinite(a.lo) || std::isfinite(a.hi)) window = window_from(a, p);
    auto rep = check_consistency(p, std::max<std::size_t>(a.grid, 8),
                                 a.tolerance, window);
    ojson j{{"command", "check"},
            {"seed", a.seed},
            {"dynamic", p.name()},
            {"consistent", rep.consistent},
            {"ratio", rep.inferred_ratio},
            {"residual", rep.residual},
            {"tolerance", rep.tolerance},
            {"grid_size", rep.ratios.size()}};
    emit(a, dump(j));
    return 0;
}

int cmd_simulate(const Args& a) {
    require_format(a, {"csv"});
    auto p = resolve_dynamic(a.dynamics.at(0), hints_from(a));
    const SimConfig cfg = sim_from(a);
    auto res = simulate(p, cfg);
    if (res.paths.empty())
        throw math_error("every path aborted before the horizon");
    if (!res.incidents.empty())
        std::cerr << "note: " << res.incidents.size() << " of " << cfg.n_paths
                  << " paths aborted and were dropped\n";
    std::ostringstream os;
    if (res.paths.size() == 1)
        write_path_csv(os, res.paths[0]);
    else
        write_ensemble_csv(os, res.paths);
    emit(a, os.str());
    return 0;
}

int cmd_growth(const Args& a) {
    require_format(a, {"json"});
    if (a.mode != "time" && a.mode != "ensemble" && a.mode != "both")
        throw validation_error("--mode must be time, ensemble, or both");
    auto p = resolve_dynamic(a.dynamics.at(0), hints_from(a));
    auto u = resolve_utility(a.utility, hints_from(a));
    SimConfig cfg = sim_from(a);

    ojson j{{"command", "growth"}, {"seed", a.seed}, {"mode", a.mode},
            {"dynamic", p.name()}, {"utility", u.name()}};
    if (a.mode == "both") {
        auto rep = ergodicity_check(p, u, cfg, a.block_dt);
        j["time"] = estimate_json(rep.time_rate);
        j["ensemble"] = estimate_json(rep.ensemble_rate);
        j["compatible"] = rep.compatible;
        j["gap"] = rep.gap;
        j["combined_std_error"] = rep.combined_std_error;
    } else if (a.mode == "time") {
        cfg.n_paths = 1;
        auto res = simulate(p, cfg);
        if (res.paths.empty())
            throw math_error("the path aborted before the horizon");
        auto g = time_average_rate(transform_path(res.paths[0], u), a.block_dt);
        j["estimate"] = estimate_json(g);
    } else {
        auto inc = ensemble_increments(p, u, cfg);
        auto g = ensemble_average_rate(inc, cfg.horizon);
        j["estimate"] = estimate_json(g);
    }
    j["config"] = config_json(cfg);
    j["block_dt"] = a.block_dt;
    emit(a, dump(j));
    return 0;
}

int cmd_decide(const Args& a) {
    require_format(a, {"json"});
    if (a.dynamics.size() != 2)
        throw validation_error("decide needs --dynamic twice: the process and "
                               "the alternative");
    auto p = resolve_dynamic(a.dynamics[0], hints_from(a));
    auto q = resolve_dynamic(a.dynamics[1], hints_from(a));
    auto u = resolve_utility(a.utility, hints_from(a));
    const SimConfig cfg = sim_from(a);
    DecideOptions opts;
    opts.rate_horizon = a.rate_horizon;
    opts.rate_block_dt = a.block_dt;
    opts.common_noise = a.common_noise;
    opts.require_consistent = !a.no_precheck;
    auto r = decide(p, q, u, a.epsilon, cfg, opts);

    ojson curve = ojson::array();
    for (const auto& pt : r.dominance)
        curve.push_back({{"delta_t", pt.delta_t},
                         {"p_hat", pt.p_hat},
                         {"successes", pt.successes},
                         {"trials", pt.trials}});
    ojson j{{"command", "decide"},
            {"seed", a.seed},
            {"dynamic", p.name()},
            {"alternative", q.name()},
            {"utility", u.name()},
            {"outcome", r.outcome == DecisionOutcome::decided ? "decided"
                                                              : "no_decision"},
            {"chosen", r.chosen.empty() ? ojson(nullptr) : ojson(r.chosen)},
            {"chosen_index", r.chosen_index},
            {"epsilon", r.epsilon},
            {"p_dominance", r.p_dominance},
            {"delta_t_used", r.delta_t_used},
            {"converged", r.converged},
            {"rate", estimate_json(r.rate)},
            {"rate_star", estimate_json(r.rate_star)},
            {"rate_gap", r.rate_gap},
            {"dominance", std::move(curve)},
            {"rate_horizon", a.rate_horizon},
            {"config", config_json(cfg)}};
    emit(a, dump(j));
    return r.outcome == DecisionOutcome::decided ? 0 : 4;
}

int cmd_density(const Args& a) {
    require_format(a, {"csv"});
    if (a.variance != "brownian" && a.variance != "printed")
        throw validation_error("--variance must be brownian or printed");
    const auto vc = a.variance == "brownian"
                        ? VarianceConvention::brownian
                        : VarianceConvention::printed_t_squared;
    auto u = resolve_utility(a.utility, hints_from(a));
    const BrownianDrift bd{a.a_u, a.b_u};
    auto d = wealth_density(u, bd, a.x0, a.t, vc);

    double lo = a.lo, hi = a.hi;
    const bool has_lo = std::isfinite(lo), has_hi = std::isfinite(hi);
    if (has_lo != has_hi)
        throw validation_error("--lo and --hi must be given together");
    if (!has_lo) {
        // Central 4-sigma band of the level Gaussian, mapped back to wealth.
        const double mean = u.value(a.x0) + a.a_u * a.t;
        const double sd =
            a.b_u * (vc == VarianceConvention::brownian ? std::sqrt(a.t) : a.t);
        try {
            lo = u.inverse(mean - 4.0 * sd);
            hi = u.inverse(mean + 4.0 * sd);
        } catch (const math_error&) {
            throw validation_error(
                "default grid bounds fall outside the utility range; pass "
                "--lo and --hi");
        }
    }
    if (!(lo < hi)) throw validation_error("--lo must be below --hi");
    std::vector<double> grid(a.grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = lo + (hi - lo) * double(i) / double(grid.size() - 1);
    std::ostringstream os;
    write_density_csv(os, d, grid);
    emit(a, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Args a;
    CLI::App app{"utility functions and the wealth dynamics they generate"};
    app.require_subcommand(1);

    const auto add_spec_opts = [&a](CLI::App* cmd) {
        cmd->add_option("--domain", a.domain,
                        "domain LO:HI for expression specs (-inf/inf allowed)");
        cmd->add_option("--x0", a.x0, "initial wealth")->capture_default_str();
    };
    const auto add_rates = [&a](CLI::App* cmd) {
        cmd->add_option("--a_u", a.a_u, "utility-side drift")->capture_default_str();
        cmd->add_option("--b_u", a.b_u, "utility-side volatility")->capture_default_str();
    };
    const auto add_sim_opts = [&a](CLI::App* cmd) {
        cmd->add_option("--dt", a.dt, "integration step")->capture_default_str();
        cmd->add_option("--horizon", a.horizon, "time horizon")->capture_default_str();
        cmd->add_option("--paths", a.paths, "number of paths")->capture_default_str();
        cmd->add_option("--seed", a.seed, "random seed")->capture_default_str();
        cmd->add_option("--threads", a.threads, "worker threads")->capture_default_str();
    };
    const auto add_out_opts = [&a](CLI::App* cmd) {
        cmd->add_option("--out", a.out, "output file (stdout when absent)");
        cmd->add_option("--format", a.format, "output format: json or csv");
    };
    const auto add_window = [&a](CLI::App* cmd) {
        cmd->add_option("--lo", a.lo, "window lower bound");
        cmd->add_option("--hi", a.hi, "window upper bound");
        cmd->add_option("--grid", a.grid, "grid points")->capture_default_str();
    };

    auto* derive_dyn = app.add_subcommand(
        "derive-dynamic", "wealth process generated by a utility");
    derive_dyn->add_option("--utility", a.utility, "utility spec")->required();
    add_rates(derive_dyn);
    add_spec_opts(derive_dyn);
    add_window(derive_dyn);
    add_out_opts(derive_dyn);

    auto* derive_u = app.add_subcommand(
        "derive-utility", "utility recovered from a consistent dynamic");
    derive_u->add_option("--dynamic", a.dynamics, "dynamic spec")->required();
    derive_u->add_option("--b_u", a.b_u, "utility-side volatility scale")->capture_default_str();
    derive_u->add_option("--x_ref", a.x_ref, "normalization point u(x_ref)=0")->capture_default_str();
    derive_u->add_option("--a_u", a.a_u,
                         "catalog coefficient fill for bare dynamic names")->capture_default_str();
    derive_u->add_option("--tolerance", a.tolerance, "consistency tolerance")->capture_default_str();
    add_spec_opts(derive_u);
    add_window(derive_u);
    add_out_opts(derive_u);

    auto* check = app.add_subcommand(
        "check", "does any utility generate this dynamic");
    check->add_option("--dynamic", a.dynamics, "dynamic spec")->required();
    check->add_option("--tolerance", a.tolerance, "consistency tolerance")->capture_default_str();
    check->add_option("--seed", a.seed, "echoed in the report")->capture_default_str();
    add_rates(check);
    add_spec_opts(check);
    add_window(check);
    add_out_opts(check);

    auto* sim = app.add_subcommand("simulate", "Euler paths of a dynamic");
    sim->add_option("--dynamic", a.dynamics, "dynamic spec")->required();
    add_rates(sim);
    add_spec_opts(sim);
    add_sim_opts(sim);
    add_out_opts(sim);

    auto* growth = app.add_subcommand(
        "growth", "time-average and ensemble growth rates");
    growth->add_option("--dynamic", a.dynamics, "dynamic spec")->required();
    growth->add_option("--utility", a.utility, "utility spec")->required();
    growth->add_option("--mode", a.mode, "time, ensemble, or both")->capture_default_str();
    growth->add_option("--block_dt", a.block_dt, "time-average block span")->capture_default_str();
    add_rates(growth);
    add_spec_opts(growth);
    add_sim_opts(growth);
    add_out_opts(growth);

    auto* dec = app.add_subcommand(
        "decide", "time-based choice between two dynamics");
    dec->add_option("--dynamic", a.dynamics,
                    "dynamic spec, given twice: process then alternative")
        ->required();
    dec->add_option("--utility", a.utility, "shared utility spec")->required();
    dec->add_option("--epsilon", a.epsilon, "dominance significance level")->capture_default_str();
    dec->add_option("--rate_horizon", a.rate_horizon,
                    "horizon for the growth-rate legs")->capture_default_str();
    dec->add_option("--block_dt", a.block_dt, "time-average block span")->capture_default_str();
    dec->add_flag("--common_noise", a.common_noise,
                  "drive both processes with the same draws");
    dec->add_flag("--no_precheck", a.no_precheck,
                  "skip the utility-generates-dynamic check");
    add_rates(dec);
    add_spec_opts(dec);
    add_sim_opts(dec);
    add_out_opts(dec);

    auto* dens = app.add_subcommand(
        "density", "implied wealth distribution at a fixed time");
    dens->add_option("--utility", a.utility, "utility spec")->required();
    dens->add_option("--t", a.t, "elapsed time")->required();
    dens->add_option("--variance", a.variance,
                     "spread convention: brownian or printed")->capture_default_str();
    dens->add_option("--seed", a.seed, "echoed for symmetry")->capture_default_str();
    add_rates(dens);
    add_spec_opts(dens);
    add_window(dens);
    add_out_opts(dens);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(derive_dyn)) return cmd_derive_dynamic(a);
        if (app.got_subcommand(derive_u)) return cmd_derive_utility(a);
        if (app.got_subcommand(check)) return cmd_check(a);
        if (app.got_subcommand(sim)) return cmd_simulate(a);
        if (app.got_subcommand(growth)) return cmd_growth(a);
        if (app.got_subcommand(dec)) return cmd_decide(a);
        if (app.got_subcommand(dens)) return cmd_density(a);
    } catch (const parse_error& e) {
        std::cerr << "parse error at offset " << e.offset << ": " << e.what()
                  << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const math_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
