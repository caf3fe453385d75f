#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracon/error.hpp"
#include "fracon/graph.hpp"
#include "fracon/model.hpp"

namespace fracon {

namespace detail {

inline void require_gain(double gain) {
    if (!(gain > 0.0) || !std::isfinite(gain))
        throw InvalidArgument("gain must be positive");
}

inline void require_order(double order) {
    if (!(order > 0.0 && order <= 1.0))
        throw InvalidArgument("order must lie in (0, 1]");
}

inline void require_symmetric(const Digraph& g, const char* which) {
    if (!is_symmetric(g))
        throw InapplicableBound(std::string(which) + " requires symmetric weights");
}

inline double positive_spectral_radius(const Digraph& g, const char* which) {
    const double rho = spectrum(g).spectral_radius;
    if (!(rho > 0.0))
        throw InvalidArgument(std::string(which) + ": Laplacian has zero spectral radius (no edges)");
    return rho;
}

} // namespace detail

/// Gerschgorin delay bound pi / (2 (2 gain dmax)^(1/order)).
inline double theorem1_bound(const Digraph& g, double gain, double order) {
    detail::require_gain(gain);
    detail::require_order(order);
    const double dmax = laplacian(g).max_degree;
    if (!(dmax > 0.0))
        throw InvalidArgument("theorem1_bound: maximum degree is zero, bound undefined");
    return std::numbers::pi / (2.0 * std::pow(2.0 * gain * dmax, 1.0 / order));
}

/// Largest gain whose Theorem-1 bound still admits `delay`; inverse of
/// theorem1_bound in the gain argument.
inline double max_gain_for_delay(const Digraph& g, double delay, double order) {
    detail::require_order(order);
    if (!(delay > 0.0))
        throw InvalidArgument("max_gain_for_delay: delay must be positive");
    const double dmax = laplacian(g).max_degree;
    if (!(dmax > 0.0))
        throw InvalidArgument("max_gain_for_delay: maximum degree is zero");
    return std::pow(std::numbers::pi / (2.0 * delay), order) / (2.0 * dmax);
}

/// Spectral delay bound pi / (2 (gain rho_L)^(1/order)) for symmetric topologies.
inline double corollary1_bound(const Digraph& g, double gain, double order) {
    detail::require_gain(gain);
    detail::require_order(order);
    detail::require_symmetric(g, "corollary1_bound");
    if (!has_spanning_root(g))
        throw InapplicableBound("corollary1_bound requires a spanning root");
    const double rho = detail::positive_spectral_radius(g, "corollary1_bound");
    return std::numbers::pi / (2.0 * std::pow(gain * rho, 1.0 / order));
}

/// Integer-order bound pi / (2 gain lambda_max), symmetric topologies.
inline double corollary2_bound(const Digraph& g, double gain) {
    detail::require_gain(gain);
    detail::require_symmetric(g, "corollary2_bound");
    const double lambda_max = spectrum(g).max_real_eigenvalue;
    if (!(lambda_max > 0.0))
        throw InvalidArgument("corollary2_bound: largest Laplacian eigenvalue must be positive");
    return std::numbers::pi / (2.0 * gain * lambda_max);
}

/// Integer-order uniform-delay bound pi / (2 gain rho), symmetric topologies.
inline double corollary3_bound(const Digraph& g, double gain) {
    detail::require_gain(gain);
    detail::require_symmetric(g, "corollary3_bound");
    const double rho = detail::positive_spectral_radius(g, "corollary3_bound");
    return std::numbers::pi / (2.0 * gain * rho);
}

/// A corollary value, or the reason it does not apply.
struct OptionalBound {
    std::optional<double> value;
    std::string reason;

    [[nodiscard]] bool applicable() const noexcept { return value.has_value(); }
};

struct BoundReport {
    double gain = 0.0;
    double order_used = 1.0;
    double theorem1 = 0.0;
    OptionalBound corollary1;
    OptionalBound corollary2;
    OptionalBound corollary3;
};

/// Order fed to the single-order bounds: the smallest order among the agents.
inline double order_for_bounds(const Scenario& s) {
    double order = 1.0;
    for (const auto& a : s.agents)
        order = std::min(order, a.order);
    return order;
}

inline BoundReport bound_report(const Scenario& s, std::optional<double> order = std::nullopt) {
    BoundReport r;
    r.gain = s.gain;
    r.order_used = order.value_or(order_for_bounds(s));
    r.theorem1 = theorem1_bound(s.graph, s.gain, r.order_used);

    bool all_integer = true;
    bool uniform = true;
    for (const auto& a : s.agents) {
        all_integer = all_integer && a.is_integer();
        uniform = uniform && a.delay == s.agents.front().delay;
    }

    auto attempt = [](OptionalBound& slot, auto&& fn) {
        try {
            slot.value = fn();
        } catch (const Error& e) {
            slot.value.reset();
            slot.reason = e.what();
        }
    };

    attempt(r.corollary1, [&] { return corollary1_bound(s.graph, s.gain, r.order_used); });
    if (all_integer)
        attempt(r.corollary2, [&] { return corollary2_bound(s.graph, s.gain); });
    else
        r.corollary2.reason = "corollary2_bound requires every agent to have order 1";
    if (!all_integer)
        r.corollary3.reason = "corollary3_bound requires every agent to have order 1";
    else if (!uniform)
        r.corollary3.reason = "corollary3_bound requires a uniform delay";
    else
        attempt(r.corollary3, [&] { return corollary3_bound(s.graph, s.gain); });
    return r;
}

struct CurvePoint {
    double gain;
    double tau_bound;
};

/// Theorem-1 bound over `samples` evenly spaced gains in [gain_min, gain_max].
inline std::vector<CurvePoint> gain_delay_curve(const Digraph& g, double order, double gain_min,
                                                double gain_max, std::size_t samples) {
    if (!(gain_min > 0.0 && gain_min < gain_max))
        throw InvalidArgument("gain_delay_curve: need 0 < gain_min < gain_max");
    if (samples < 2)
        throw InvalidArgument("gain_delay_curve: need at least two samples");
    std::vector<CurvePoint> out;
    out.reserve(samples);
    const double span = gain_max - gain_min;
    for (std::size_t i = 0; i < samples; ++i) {
        const double gain = i + 1 == samples
                                ? gain_max
                                : gain_min + span * static_cast<double>(i) / static_cast<double>(samples - 1);
        out.push_back({gain, theorem1_bound(g, gain, order)});
    }
    return out;
}

} // namespace fracon
