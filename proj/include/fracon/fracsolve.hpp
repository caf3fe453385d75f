#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracon/error.hpp"
#include "fracon/graph.hpp"
#include "fracon/model.hpp"

namespace fracon {

/// Grünwald–Letnikov weights c_j = (-1)^j binom(order, j), j = 0..count.
struct GLCoefficientTable {
    double order = 1.0;
    std::vector<double> coefficients;
};

inline GLCoefficientTable gl_coefficients(double order, std::size_t count) {
    if (!(order > 0.0 && order <= 1.0))
        throw InvalidArgument("gl_coefficients: order must lie in (0, 1]");
    GLCoefficientTable table{order, std::vector<double>(count + 1)};
    auto& c = table.coefficients;
    c[0] = 1.0;
    for (std::size_t j = 1; j <= count; ++j)
        c[j] = c[j - 1] * (1.0 - (order + 1.0) / static_cast<double>(j));
    return table;
}

inline double gamma_value(double x) {
    if (!(x > 0.0))
        throw InvalidArgument("gamma_value: argument must be positive");
    return std::tgamma(x);
}

/// Exact Caputo derivative (base point 0) of f(t) = t^power, power >= 1.
inline double caputo_of_monomial(double power, double order, double t) {
    if (!(power >= 1.0))
        throw InvalidArgument("caputo_of_monomial: power must be >= 1");
    if (!(order > 0.0 && order <= 1.0))
        throw InvalidArgument("caputo_of_monomial: order must lie in (0, 1]");
    if (!(t >= 0.0))
        throw InvalidArgument("caputo_of_monomial: t must be >= 0");
    return gamma_value(power + 1.0) / gamma_value(power + 1.0 - order) * std::pow(t, power - order);
}

/// Caputo derivative of the sampled function at the last sample t = K h,
/// h^-a sum_j c_j (f(t_{K-j}) - f(0)).
inline double gl_caputo_estimate(std::span<const double> samples, double order, double step) {
    if (samples.size() < 2)
        throw InvalidArgument("gl_caputo_estimate: need at least two samples");
    if (!(step > 0.0))
        throw InvalidArgument("gl_caputo_estimate: step must be positive");
    const std::size_t last = samples.size() - 1;
    const auto table = gl_coefficients(order, last);
    const double f0 = samples[0];
    double acc = 0.0;
    for (std::size_t j = 0; j <= last; ++j)
        acc += table.coefficients[j] * (samples[last - j] - f0);
    return acc / std::pow(step, order);
}

/// Time grid plus per-agent state history. states[i][k] = x_{i+1}(t_k).
struct Trajectory {
    double step = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    /// Filled in by classification when the run reached consensus.
    std::optional<double> consensus_value;
    /// Time of the first non-finite state; the history stops just before it.
    std::optional<double> diverged_at;
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t agent_count() const noexcept { return states.size(); }
    [[nodiscard]] std::size_t sample_count() const noexcept { return times.size(); }
};

struct DelayOnGrid {
    std::size_t steps = 0;
    double rounded = 0.0;
    bool shifted = false; ///< rounding moved the delay by more than 1e-9 s
};

inline DelayOnGrid round_delay_to_grid(double delay, double step) {
    DelayOnGrid out;
    out.steps = static_cast<std::size_t>(std::llround(delay / step));
    out.rounded = static_cast<double>(out.steps) * step;
    out.shifted = std::abs(out.rounded - delay) > 1e-9;
    return out;
}

namespace detail {

/// sum_{j=1}^{len} c[j] * y[last + 1 - j] over the own-history of one agent,
/// split across independent accumulators so the loop is not latency bound.
inline double gl_memory_sum(const double* c, const double* y, std::size_t last, std::size_t len) {
    // term j pairs c[j] with y[last + 1 - j]; walk y forward from its oldest used sample
    const std::size_t first = last + 1 - len;
    const double* cj = c + len;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        a0 += cj[-static_cast<std::ptrdiff_t>(i)] * y[first + i];
        a1 += cj[-static_cast<std::ptrdiff_t>(i + 1)] * y[first + i + 1];
        a2 += cj[-static_cast<std::ptrdiff_t>(i + 2)] * y[first + i + 2];
        a3 += cj[-static_cast<std::ptrdiff_t>(i + 3)] * y[first + i + 3];
    }
    for (; i < len; ++i)
        a0 += cj[-static_cast<std::ptrdiff_t>(i)] * y[first + i];
    return (a0 + a1) + (a2 + a3);
}

} // namespace detail

/// Time-steps the delayed compounded-order consensus loop.
///
/// Agent i reads every state at its own lag tau_i,
///   u_i = -gain * sum_k a_ik (x_i(t - tau_i) - x_k(t - tau_i)),
/// with constant prehistory x(t) = x(0) for t < 0. Integer agents take a
/// forward-Euler step; fractional agents take an explicit Grünwald–Letnikov
/// step on x - x(0). Delays are rounded to the nearest multiple of h.
inline Trajectory simulate(const Scenario& scenario) {
    validate(scenario);
    const auto n = scenario.size();
    const auto& solver = scenario.solver;
    const double h = solver.step;
    const std::size_t steps = solver.steps();
    const auto agents = agents_by_index(scenario);
    const Matrix& a = scenario.graph.weights();

    Trajectory traj;
    traj.step = h;
    traj.times.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.assign(n, {});

    std::vector<std::size_t> lag(n);
    std::vector<std::vector<double>> offset(n); // x_i(t_k) - x_i(0), fractional agents only
    std::map<double, GLCoefficientTable> tables;
    std::vector<const double*> coeff(n, nullptr);
    std::vector<double> h_pow(n);

    for (std::size_t i = 0; i < n; ++i) {
        traj.states[i].reserve(steps + 1);
        traj.states[i].push_back(scenario.initial[i]);
        const auto grid = round_delay_to_grid(agents[i].delay, h);
        lag[i] = grid.steps;
        if (grid.shifted)
            traj.warnings.push_back("agent " + std::to_string(i + 1) + ": delay " +
                                    std::to_string(agents[i].delay) + " s rounded to " +
                                    std::to_string(grid.rounded) + " s");
        h_pow[i] = std::pow(h, agents[i].order);
        if (!agents[i].is_integer()) {
            offset[i].reserve(steps + 1);
            offset[i].push_back(0.0);
            const std::size_t needed = solver.memory ? std::min(*solver.memory, steps) : steps;
            auto [it, inserted] = tables.try_emplace(agents[i].order);
            if (inserted)
                it->second = gl_coefficients(agents[i].order, needed);
            coeff[i] = it->second.coefficients.data();
        }
    }

    std::vector<double> input(n);
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t at = k >= lag[i] ? k - lag[i] : 0;
            const double xi = traj.states[i][at];
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (w != 0.0)
                    acc += w * (xi - traj.states[j][at]);
            }
            input[i] = -scenario.gain * acc;
        }

        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            double next;
            if (agents[i].is_integer()) {
                next = traj.states[i][k] + h * input[i];
            } else {
                const std::size_t len = solver.memory ? std::min(*solver.memory, k + 1) : k + 1;
                const double memory = detail::gl_memory_sum(coeff[i], offset[i].data(), k, len);
                const double y = -memory + h_pow[i] * input[i];
                offset[i].push_back(y);
                next = scenario.initial[i] + y;
            }
            finite = finite && std::isfinite(next);
            traj.states[i].push_back(next);
        }

        const double t = static_cast<double>(k + 1) * h;
        if (!finite) {
            for (auto& row : traj.states)
                row.pop_back();
            traj.diverged_at = t;
            break;
        }
        traj.times.push_back(t);
    }
    return traj;
}

} // namespace fracon
