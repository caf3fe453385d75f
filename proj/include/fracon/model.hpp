#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracon/error.hpp"
#include "fracon/graph.hpp"

namespace fracon {

/// Per-agent dynamics. order == 1 is an integer-order (first-derivative)
/// agent; 0 < order < 1 is a Caputo fractional agent.
struct AgentModel {
    std::size_t id = 1; ///< 1-based
    double order = 1.0;
    double delay = 0.0; ///< seconds

    [[nodiscard]] bool is_integer() const noexcept { return order == 1.0; }

    friend bool operator==(const AgentModel&, const AgentModel&) = default;
};

inline void validate(const AgentModel& a) {
    if (!(a.order > 0.0 && a.order <= 1.0))
        throw InvalidArgument("agent " + std::to_string(a.id) + ": order must lie in (0, 1]");
    if (!(a.delay >= 0.0) || !std::isfinite(a.delay))
        throw InvalidArgument("agent " + std::to_string(a.id) + ": delay must be finite and >= 0");
}

struct SolverParams {
    double step = 1e-3;    ///< h, seconds
    double horizon = 30.0; ///< T, seconds
    /// Number of past steps kept in the fractional memory sum; nullopt keeps all.
    std::optional<std::size_t> memory;

    [[nodiscard]] std::size_t steps() const {
        return static_cast<std::size_t>(std::llround(horizon / step));
    }

    friend bool operator==(const SolverParams&, const SolverParams&) = default;
};

inline void validate(const SolverParams& p) {
    if (!(p.step > 0.0) || !std::isfinite(p.step))
        throw InvalidArgument("solver step must be positive");
    if (!(p.horizon > p.step) || !std::isfinite(p.horizon))
        throw InvalidArgument("solver horizon must exceed the step");
    if (p.memory && *p.memory < 1)
        throw InvalidArgument("solver memory must be >= 1 when truncated");
}

/// Complete description of one closed-loop run.
struct Scenario {
    Digraph graph{Matrix::Zero(1, 1)};
    std::vector<AgentModel> agents;
    double gain = 1.0;
    std::vector<double> initial;
    SolverParams solver;

    [[nodiscard]] std::size_t size() const noexcept { return graph.size(); }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline void validate(const Scenario& s) {
    const auto n = s.size();
    if (s.agents.size() != n)
        throw InvalidArgument("scenario needs exactly one agent per node");
    std::vector<char> seen(n);
    for (const auto& a : s.agents) {
        if (a.id < 1 || a.id > n || seen[a.id - 1])
            throw InvalidArgument("agent ids must be exactly 1..n, each once");
        seen[a.id - 1] = 1;
        validate(a);
    }
    if (!(s.gain > 0.0) || !std::isfinite(s.gain))
        throw InvalidArgument("gain must be positive");
    if (s.initial.size() != n)
        throw InvalidArgument("initial state must have length n");
    for (double x : s.initial)
        if (!std::isfinite(x))
            throw InvalidArgument("initial state must be finite");
    validate(s.solver);
}

/// Agents ordered by id (index i holds agent i + 1).
inline std::vector<AgentModel> agents_by_index(const Scenario& s) {
    std::vector<AgentModel> out(s.agents.size());
    for (const auto& a : s.agents)
        out.at(a.id - 1) = a;
    return out;
}

/// Copy of `s` with every delay replaced by `tau`.
inline Scenario with_uniform_delay(Scenario s, double tau) {
    for (auto& a : s.agents)
        a.delay = tau;
    return s;
}

} // namespace fracon
