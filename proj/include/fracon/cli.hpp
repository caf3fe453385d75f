#pragma once

#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracon/bounds.hpp"
#include "fracon/error.hpp"
#include "fracon/fracsolve.hpp"
#include "fracon/freqcert.hpp"
#include "fracon/scenario.hpp"

namespace fracon {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verdict_failed = 1;
inline constexpr int usage = 2;
} // namespace exit_code

namespace detail {

inline void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-")
        out << content;
    else
        write_file_atomic(out_path, content);
}

inline Scenario load_for_cli(const std::string& path, std::optional<double> delay, std::ostream& err) {
    std::vector<std::string> warnings;
    Scenario s = parse_scenario(path, &warnings);
    if (delay) {
        s = with_uniform_delay(std::move(s), *delay);
        auto moved = round_delays_to_grid(s);
        warnings.insert(warnings.end(), moved.begin(), moved.end());
    }
    for (const auto& w : warnings)
        err << "warning: " << w << '\n';
    return s;
}

inline std::string describe(const OptionalBound& b) {
    std::ostringstream os;
    os << std::setprecision(6);
    if (b.value)
        os << *b.value;
    else
        os << "inapplicable (" << b.reason << ")";
    return os.str();
}

} // namespace detail

/// Command-line front end. Exit codes: 0 success or Pass/Converged,
/// 1 for Fail/Inconclusive/NotConverged/Diverged, 2 for usage or input errors.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delayed compounded-order consensus: simulation, delay bounds and stability certificates",
                 "fracon"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_path;
    std::optional<double> delay;

    auto* sim = app.add_subcommand("simulate", "integrate the closed loop and write the trajectory CSV");
    std::size_t stride = 10;
    ClassifyOptions classify_opts;
    sim->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--out", out_path, "trajectory CSV path (default stdout)");
    sim->add_option("--stride", stride, "write every N-th step")->check(CLI::PositiveNumber);
    sim->add_option("--delay", delay, "override every agent's delay (s)")->check(CLI::NonNegativeNumber);
    sim->add_option("--eps-c", classify_opts.consensus_tolerance, "consensus spread tolerance");
    sim->add_option("--eps-m", classify_opts.monotone_slack, "tail monotonicity slack");

    auto* bnd = app.add_subcommand("bound", "evaluate the closed-form delay bounds");
    std::optional<double> order;
    bnd->add_option("scenario", scenario_path, "scenario JSON file")->required();
    bnd->add_option("--order", order, "fractional order for the bounds (default: smallest agent order)");

    auto* cert = app.add_subcommand("certify", "frequency-domain stability certificate");
    OmegaGridOptions grid_opts;
    cert->add_option("scenario", scenario_path, "scenario JSON file")->required();
    cert->add_option("--delay", delay, "override every agent's delay (s)")->check(CLI::NonNegativeNumber);
    cert->add_option("--omega-min", grid_opts.lo, "lowest grid frequency (rad/s)");
    cert->add_option("--omega-max", grid_opts.hi, "highest grid frequency (rad/s)");
    cert->add_option("--omega-points", grid_opts.points, "log-spaced grid points");

    auto* crv = app.add_subcommand("curve", "tabulate the gain vs. delay-bound curve");
    double gain_min = 0.2;
    double gain_max = 2.0;
    std::size_t samples = 50;
    crv->add_option("scenario", scenario_path, "scenario JSON file")->required();
    crv->add_option("--gamma-min", gain_min, "smallest gain");
    crv->add_option("--gamma-max", gain_max, "largest gain");
    crv->add_option("--samples", samples, "number of gains");
    crv->add_option("--order", order, "fractional order (default: smallest agent order)");
    crv->add_option("--out", out_path, "curve CSV path (default stdout)");

    auto* crit = app.add_subcommand("critical", "bisect the largest uniform delay that still reaches consensus");
    double tau_lo = 0.0;
    double tau_hi = 0.0;
    double tol = 1e-2;
    std::optional<double> horizon;
    crit->add_option("scenario", scenario_path, "scenario JSON file")->required();
    crit->add_option("--lo", tau_lo, "delay known to converge (s)")->required();
    crit->add_option("--hi", tau_hi, "delay known not to converge (s)")->required();
    crit->add_option("--tol", tol, "final bracket width (s)");
    crit->add_option("--horizon", horizon, "override the simulation horizon (s)");
    crit->add_option("--eps-c", classify_opts.consensus_tolerance, "consensus spread tolerance");
    crit->add_option("--eps-m", classify_opts.monotone_slack, "tail monotonicity slack");

    std::vector<const char*> argv;
    argv.push_back("fracon");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    }

    try {
        if (*sim) {
            const Scenario s = detail::load_for_cli(scenario_path, delay, err);
            const Trajectory traj = simulate(s);
            for (const auto& w : traj.warnings)
                err << "warning: " << w << '\n';
            detail::emit(trajectory_csv(traj, stride), out_path, out);
            const Classification c = classify(traj, classify_opts);
            err << "verdict = " << to_string(c.verdict) << "\nfinal_spread = " << std::setprecision(6)
                << c.final_spread << '\n';
            if (c.consensus_value)
                err << "consensus_value = " << *c.consensus_value << '\n';
            if (traj.diverged_at)
                err << "diverged_at = " << *traj.diverged_at << " s\n";
            return c.verdict == ConsensusVerdict::Converged ? exit_code::ok : exit_code::verdict_failed;
        }

        if (*bnd) {
            const Scenario s = detail::load_for_cli(scenario_path, std::nullopt, err);
            const BoundReport r = bound_report(s, order);
            out << std::setprecision(6);
            out << "gain = " << r.gain << "\norder = " << r.order_used << "\ntheorem1 = " << r.theorem1
                << "\ncorollary1 = " << detail::describe(r.corollary1)
                << "\ncorollary2 = " << detail::describe(r.corollary2)
                << "\ncorollary3 = " << detail::describe(r.corollary3) << '\n';
            return exit_code::ok;
        }

        if (*cert) {
            const Scenario s = detail::load_for_cli(scenario_path, delay, err);
            const CertificateResult r = certify(s, grid_opts);
            out << std::setprecision(6);
            for (std::size_t i = 0; i < r.criterion.values.size(); ++i) {
                out << "criterion x" << (i + 1) << " = ";
                if (r.criterion.values[i])
                    out << *r.criterion.values[i] << '\n';
                else
                    out << "skipped (no delay)\n";
            }
            out << "criterion_max = " << r.criterion.max_value
                << "\ncriterion_pass = " << (r.criterion.pass ? "true" : "false") << '\n';
            for (std::size_t i = 0; i < r.disc_margins.size(); ++i)
                out << "disc_margin x" << (i + 1) << " = " << r.disc_margins[i].min_delta << " at omega "
                    << r.disc_margins[i].argmin_omega << '\n';
            for (const auto& c : r.loci_crossings)
                if (c.left_of_minus_one)
                    out << "crossing omega " << c.omega << " at " << c.point << " (left of -1)\n";
            for (double w : r.failed_omegas)
                err << "warning: eigen-solver failed at omega " << w << '\n';
            out << "verdict = " << to_string(r.verdict) << '\n';
            return r.verdict == Verdict::Pass ? exit_code::ok : exit_code::verdict_failed;
        }

        if (*crv) {
            const Scenario s = detail::load_for_cli(scenario_path, std::nullopt, err);
            const double used = order.value_or(order_for_bounds(s));
            detail::emit(curve_csv(gain_delay_curve(s.graph, used, gain_min, gain_max, samples)), out_path, out);
            return exit_code::ok;
        }

        if (*crit) {
            Scenario s = detail::load_for_cli(scenario_path, std::nullopt, err);
            if (horizon)
                s.solver.horizon = *horizon;
            const BisectionResult r = bisect_critical_delay(s, tau_lo, tau_hi, tol, classify_opts);
            out << std::setprecision(6) << "critical_delay = " << r.critical_delay << "\nbracket = [" << r.lo
                << ", " << r.hi << "]\niterations = " << r.iterations << "\ntheorem1 = "
                << theorem1_bound(s.graph, s.gain, order_for_bounds(s)) << '\n';
            return exit_code::ok;
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::verdict_failed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::verdict_failed;
    }
    return exit_code::usage;
}

} // namespace fracon
