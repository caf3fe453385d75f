#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracon/bounds.hpp"
#include "fracon/error.hpp"
#include "fracon/fracsolve.hpp"
#include "fracon/graph.hpp"
#include "fracon/model.hpp"

namespace fracon {

// ---------------------------------------------------------------------------
// Convergence classification

enum class ConsensusVerdict { Converged, NotConverged, Diverged };

inline const char* to_string(ConsensusVerdict v) {
    switch (v) {
    case ConsensusVerdict::Converged:
        return "Converged";
    case ConsensusVerdict::NotConverged:
        return "NotConverged";
    case ConsensusVerdict::Diverged:
        return "Diverged";
    }
    return "?";
}

struct SpreadSample {
    double t;
    double spread;
};

struct Classification {
    ConsensusVerdict verdict = ConsensusVerdict::NotConverged;
    double final_spread = 0.0;
    std::optional<double> consensus_value;
    std::vector<SpreadSample> spread_series;
};

struct ClassifyOptions {
    double consensus_tolerance = 1e-2; ///< final spread must fall below this
    double monotone_slack = 1e-3;      ///< allowed spread regrowth over the tail window
    double tail_fraction = 0.2;
    std::size_t series_stride = 10;
};

/// max_{i,k} |x_i(t_k) - x_k(t_k)| at sample k.
inline double spread_at(const Trajectory& traj, std::size_t k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : traj.states) {
        lo = std::min(lo, row[k]);
        hi = std::max(hi, row[k]);
    }
    return hi - lo;
}

/// Converged: final spread below tolerance and the spread envelope over the
/// last tail_fraction of the horizon is non-increasing up to the slack.
/// Diverged: non-finite states, or final spread above 10x the initial spread.
inline Classification classify(const Trajectory& traj, const ClassifyOptions& opts = {}) {
    if (traj.sample_count() == 0 || traj.agent_count() == 0)
        throw InvalidArgument("classify: empty trajectory");
    const std::size_t count = traj.sample_count();
    const std::size_t last = count - 1;

    Classification c;
    const std::size_t stride = std::max<std::size_t>(opts.series_stride, 1);
    for (std::size_t k = 0; k < count; k += stride)
        c.spread_series.push_back({traj.times[k], spread_at(traj, k)});
    if (last % stride != 0)
        c.spread_series.push_back({traj.times[last], spread_at(traj, last)});

    c.final_spread = spread_at(traj, last);
    const double initial_spread = spread_at(traj, 0);

    if (traj.diverged_at || !std::isfinite(c.final_spread) || c.final_spread > 10.0 * initial_spread) {
        c.verdict = ConsensusVerdict::Diverged;
        return c;
    }

    bool settled = c.final_spread < opts.consensus_tolerance;
    if (settled) {
        // envelope test: the later half of the tail window may not peak above
        // the earlier half by more than the slack
        const double t_end = traj.times[last];
        const double t_tail = t_end - opts.tail_fraction * t_end;
        const double t_mid = t_end - 0.5 * opts.tail_fraction * t_end;
        double early_peak = 0.0;
        double late_peak = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            if (traj.times[k] < t_tail)
                continue;
            const double s = spread_at(traj, k);
            if (traj.times[k] < t_mid)
                early_peak = std::max(early_peak, s);
            else
                late_peak = std::max(late_peak, s);
        }
        settled = late_peak <= early_peak + opts.monotone_slack;
    }

    if (settled) {
        c.verdict = ConsensusVerdict::Converged;
        double sum = 0.0;
        for (const auto& row : traj.states)
            sum += row[last];
        c.consensus_value = sum / static_cast<double>(traj.agent_count());
    } else {
        c.verdict = ConsensusVerdict::NotConverged;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Critical-delay bisection

struct BisectionResult {
    double critical_delay = 0.0;
    double lo = 0.0; ///< final bracket, Converged side
    double hi = 0.0; ///< final bracket, not-Converged side
    std::size_t iterations = 0;
};

/// Bisects the uniform delay between a Converged run at tau_lo and a
/// non-Converged run at tau_hi until the bracket is no wider than tol.
inline BisectionResult bisect_critical_delay(const Scenario& templ, double tau_lo, double tau_hi, double tol,
                                             const ClassifyOptions& opts = {}) {
    if (!(tau_lo >= 0.0 && tau_lo < tau_hi))
        throw InvalidArgument("bisect_critical_delay: need 0 <= tau_lo < tau_hi");
    if (!(tol > 0.0))
        throw InvalidArgument("bisect_critical_delay: tol must be positive");

    auto verdict_at = [&](double tau) {
        return classify(simulate(with_uniform_delay(templ, tau)), opts).verdict;
    };

    const auto at_lo = verdict_at(tau_lo);
    const auto at_hi = verdict_at(tau_hi);
    if (at_lo != ConsensusVerdict::Converged || at_hi == ConsensusVerdict::Converged)
        throw InvalidArgument(std::string("bisect_critical_delay: bracket invalid, tau_lo -> ") +
                              to_string(at_lo) + ", tau_hi -> " + to_string(at_hi));

    BisectionResult r{0.0, tau_lo, tau_hi, 0};
    while (r.hi - r.lo > tol) {
        const double mid = 0.5 * (r.lo + r.hi);
        if (verdict_at(mid) == ConsensusVerdict::Converged)
            r.lo = mid;
        else
            r.hi = mid;
        ++r.iterations;
    }
    r.critical_delay = 0.5 * (r.lo + r.hi);
    return r;
}

// ---------------------------------------------------------------------------
// Scenario files

/// Rounds every delay to the solver grid; returns one warning per delay that moved.
inline std::vector<std::string> round_delays_to_grid(Scenario& s) {
    std::vector<std::string> warnings;
    for (auto& a : s.agents) {
        const auto grid = round_delay_to_grid(a.delay, s.solver.step);
        if (grid.shifted) {
            std::ostringstream msg;
            msg << "agent " << a.id << ": delay " << a.delay << " s rounded to " << grid.rounded
                << " s on the step grid";
            warnings.push_back(msg.str());
        }
        a.delay = grid.rounded;
    }
    return warnings;
}

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known)
            throw ParseError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
}

inline const json& require(const json& obj, const char* key, const std::string& where = {}) {
    const std::string name = where.empty() ? key : where + "." + key;
    if (!obj.contains(key))
        throw ParseError(name, "missing required key");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& key) {
    if (!v.is_number())
        throw ParseError(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw ParseError(key, "expected a finite number");
    return x;
}

inline std::size_t as_index(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw ParseError(key, "expected a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

} // namespace detail

/// Builds a validated Scenario from its JSON form. Delays are rounded to the
/// step grid; each rounding that moves a delay appends to `warnings`.
inline Scenario scenario_from_json(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr) {
    using detail::as_index;
    using detail::as_number;
    using detail::require;
    if (!doc.is_object())
        throw ParseError("", "scenario must be a JSON object");
    detail::reject_unknown_keys(doc, {"n", "edges", "agents", "gain", "init", "solver"}, "");

    const std::size_t n = as_index(require(doc, "n"), "n");

    const auto& edges_json = require(doc, "edges");
    if (!edges_json.is_array())
        throw ParseError("edges", "expected an array of [i, k, w]");
    std::vector<Edge> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen_edges;
    for (std::size_t e = 0; e < edges_json.size(); ++e) {
        const auto& item = edges_json[e];
        const std::string key = "edges[" + std::to_string(e) + "]";
        if (!item.is_array() || item.size() != 3)
            throw ParseError(key, "expected [i, k, w]");
        const auto i = as_index(item[0], key);
        const auto k = as_index(item[1], key);
        const double w = as_number(item[2], key);
        if (i > n || k > n)
            throw ParseError(key, "node index exceeds n");
        if (i == k)
            throw ParseError(key, "self-loops are not allowed");
        if (w < 0.0)
            throw ParseError(key, "weight must be nonnegative");
        if (!seen_edges.emplace(i, k).second)
            throw ParseError(key, "duplicate edge");
        edges.push_back({i - 1, k - 1, w});
    }

    Scenario s;
    s.graph = Digraph::from_edges(n, edges);

    const auto& agents_json = require(doc, "agents");
    if (!agents_json.is_array())
        throw ParseError("agents", "expected an array of agent objects");
    for (std::size_t a = 0; a < agents_json.size(); ++a) {
        const auto& item = agents_json[a];
        const std::string where = "agents[" + std::to_string(a) + "]";
        if (!item.is_object())
            throw ParseError(where, "expected an object");
        detail::reject_unknown_keys(item, {"id", "order", "delay"}, where);
        AgentModel m;
        m.id = as_index(require(item, "id", where), where + ".id");
        m.order = as_number(require(item, "order", where), where + ".order");
        m.delay = as_number(require(item, "delay", where), where + ".delay");
        if (!(m.order > 0.0 && m.order <= 1.0))
            throw ParseError(where + ".order", "order must lie in (0, 1]");
        if (m.delay < 0.0)
            throw ParseError(where + ".delay", "delay must be >= 0");
        s.agents.push_back(m);
    }
    if (s.agents.size() != n)
        throw ParseError("agents", "expected " + std::to_string(n) + " agents, got " +
                                       std::to_string(s.agents.size()));
    {
        std::vector<char> seen(n);
        for (const auto& m : s.agents) {
            if (m.id > n || seen[m.id - 1])
                throw ParseError("agents", "agent ids must be exactly 1..n, each once");
            seen[m.id - 1] = 1;
        }
    }

    s.gain = as_number(require(doc, "gain"), "gain");
    if (!(s.gain > 0.0))
        throw ParseError("gain", "gain must be positive");

    const auto& init = require(doc, "init");
    if (!init.is_array())
        throw ParseError("init", "expected an array of numbers");
    if (init.size() != n)
        throw ParseError("init", "length " + std::to_string(init.size()) + " does not match n = " +
                                     std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        s.initial.push_back(as_number(init[i], "init[" + std::to_string(i) + "]"));

    const auto& solver = require(doc, "solver");
    if (!solver.is_object())
        throw ParseError("solver", "expected an object");
    detail::reject_unknown_keys(solver, {"h", "horizon", "memory"}, "solver");
    s.solver.step = as_number(require(solver, "h", "solver"), "solver.h");
    s.solver.horizon = as_number(require(solver, "horizon", "solver"), "solver.horizon");
    if (!(s.solver.step > 0.0))
        throw ParseError("solver.h", "step must be positive");
    if (!(s.solver.horizon > s.solver.step))
        throw ParseError("solver.horizon", "horizon must exceed the step");
    if (solver.contains("memory")) {
        const auto& mem = solver.at("memory");
        if (mem.is_string()) {
            if (mem.get<std::string>() != "full")
                throw ParseError("solver.memory", "expected \"full\" or a positive integer");
        } else {
            s.solver.memory = as_index(mem, "solver.memory");
        }
    }

    auto moved = round_delays_to_grid(s);
    if (warnings)
        warnings->insert(warnings->end(), moved.begin(), moved.end());
    return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json doc;
    doc["n"] = s.size();
    auto edges = nlohmann::json::array();
    for (const auto& e : s.graph.edges())
        edges.push_back({e.to + 1, e.from + 1, e.weight});
    doc["edges"] = std::move(edges);
    auto agents = nlohmann::json::array();
    for (const auto& a : s.agents)
        agents.push_back({{"id", a.id}, {"order", a.order}, {"delay", a.delay}});
    doc["agents"] = std::move(agents);
    doc["gain"] = s.gain;
    doc["init"] = s.initial;
    doc["solver"] = {{"h", s.solver.step}, {"horizon", s.solver.horizon}};
    if (s.solver.memory)
        doc["solver"]["memory"] = *s.solver.memory;
    else
        doc["solver"]["memory"] = "full";
    return doc;
}

inline Scenario parse_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("", "cannot open scenario file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(doc, warnings);
}

// ---------------------------------------------------------------------------
// Output files

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Header t,x1,...,xn; every `stride`-th sample plus the final one.
inline std::string trajectory_csv(const Trajectory& traj, std::size_t stride = 10) {
    stride = std::max<std::size_t>(stride, 1);
    std::ostringstream out;
    out << std::setprecision(10);
    out << "t";
    for (std::size_t i = 0; i < traj.agent_count(); ++i)
        out << ",x" << (i + 1);
    out << '\n';
    auto row = [&](std::size_t k) {
        out << traj.times[k];
        for (const auto& r : traj.states)
            out << ',' << r[k];
        out << '\n';
    };
    const std::size_t count = traj.sample_count();
    for (std::size_t k = 0; k < count; k += stride)
        row(k);
    if (count > 0 && (count - 1) % stride != 0)
        row(count - 1);
    return out.str();
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "gamma,tau_bound\n";
    for (const auto& p : curve)
        out << p.gain << ',' << p.tau_bound << '\n';
    return out.str();
}

} // namespace fracon
