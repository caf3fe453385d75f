#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracon/error.hpp"
#include "fracon/graph.hpp"
#include "fracon/model.hpp"

namespace fracon {

using ComplexMatrix = Eigen::MatrixXcd;

/// Strictly increasing positive frequencies, rad/s.
struct OmegaGrid {
    std::vector<double> values;
};

struct OmegaGridOptions {
    double lo = 1e-3;
    double hi = 1e3;
    std::size_t points = 2000;
};

/// Log-spaced grid with each agent's critical frequencies pi/(2 tau) and
/// (2 - order) pi / (2 tau) inserted exactly.
inline OmegaGrid make_omega_grid(std::span<const AgentModel> agents, const OmegaGridOptions& opts = {}) {
    if (!(opts.lo > 0.0 && opts.lo < opts.hi) || opts.points < 2)
        throw InvalidArgument("omega grid needs 0 < lo < hi and at least two points");
    OmegaGrid grid;
    const double lo = std::log10(opts.lo);
    const double hi = std::log10(opts.hi);
    for (std::size_t i = 0; i < opts.points; ++i)
        grid.values.push_back(
            std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opts.points - 1)));
    for (const auto& a : agents) {
        if (a.delay > 0.0) {
            grid.values.push_back(std::numbers::pi / (2.0 * a.delay));
            grid.values.push_back((2.0 - a.order) * std::numbers::pi / (2.0 * a.delay));
        }
    }
    std::sort(grid.values.begin(), grid.values.end());
    grid.values.erase(std::unique(grid.values.begin(), grid.values.end()), grid.values.end());
    return grid;
}

namespace detail {

/// (j omega)^order on the principal branch, omega^order e^{j order pi/2}.
inline Complex j_omega_pow(double omega, double order) {
    if (order == 1.0)
        return {0.0, omega};
    return std::polar(std::pow(omega, order), order * std::numbers::pi / 2.0);
}

inline void require_agents(const Digraph& g, std::span<const AgentModel> agents) {
    if (agents.size() != g.size())
        throw InvalidArgument("need exactly one agent model per node");
}

} // namespace detail

struct CriterionResult {
    /// v_i per agent; empty for agents without delay.
    std::vector<std::optional<double>> values;
    double max_value = 0.0;
    bool pass = true;
};

/// Disc check at each agent's critical frequency pi/(2 tau_i) with test point -1:
/// v_i = 2 gain d_i (pi / (2 tau_i))^(-order_i); passes when every v_i < 1.
/// `agents` are indexed by node.
inline CriterionResult delay_criterion(const Digraph& g, std::span<const AgentModel> agents, double gain) {
    detail::require_agents(g, agents);
    const Vector d = degree_vector(g);
    CriterionResult r;
    r.values.resize(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto& a = agents[i];
        if (!(a.delay > 0.0))
            continue;
        const double critical = std::numbers::pi / (2.0 * a.delay);
        const double v = 2.0 * gain * d(static_cast<Eigen::Index>(i)) * std::pow(critical, -a.order);
        r.values[i] = v;
        r.max_value = std::max(r.max_value, v);
    }
    r.pass = r.max_value < 1.0;
    return r;
}

/// Delta_i(omega) = 1 + 2 gain d_i omega^(-order) cos(omega tau + order pi / 2).
/// Positive when -1 lies outside agent i's Gerschgorin disc of G(j omega).
inline double disc_delta(double omega, double gain, double degree, double order, double delay) {
    return 1.0 + 2.0 * gain * degree * std::pow(omega, -order) *
                     std::cos(omega * delay + order * std::numbers::pi / 2.0);
}

struct DiscMargin {
    double min_delta = std::numeric_limits<double>::infinity();
    double argmin_omega = 0.0;
};

inline std::vector<DiscMargin> disc_margin(const Digraph& g, std::span<const AgentModel> agents, double gain,
                                           const OmegaGrid& grid) {
    detail::require_agents(g, agents);
    if (grid.values.empty())
        throw InvalidArgument("disc_margin: empty frequency grid");
    const Vector d = degree_vector(g);
    std::vector<DiscMargin> out(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        for (double omega : grid.values) {
            const double delta =
                disc_delta(omega, gain, d(static_cast<Eigen::Index>(i)), agents[i].order, agents[i].delay);
            if (delta < out[i].min_delta)
                out[i] = {delta, omega};
        }
    }
    return out;
}

/// det(diag(s^order_i) + gain E(s) L) at s = j omega, E(s) = diag(e^{-tau_i s}).
inline Complex characteristic_value(double omega, const Digraph& g, std::span<const AgentModel> agents,
                                    double gain) {
    detail::require_agents(g, agents);
    if (!(omega > 0.0))
        throw InvalidArgument("characteristic_value: omega must be positive");
    const auto n = static_cast<Eigen::Index>(g.size());
    const Matrix lap = laplacian(g).matrix;
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex delay = std::polar(1.0, -omega * agents[static_cast<std::size_t>(i)].delay);
        for (Eigen::Index k = 0; k < n; ++k)
            m(i, k) = gain * delay * lap(i, k);
        m(i, i) += detail::j_omega_pow(omega, agents[static_cast<std::size_t>(i)].order);
    }
    return m.determinant();
}

/// Open-loop return matrix G(j omega) = gain diag((j omega)^-order_i e^{-j omega tau_i}) L.
inline ComplexMatrix return_matrix(double omega, const Digraph& g, std::span<const AgentModel> agents,
                                   double gain) {
    detail::require_agents(g, agents);
    const auto n = static_cast<Eigen::Index>(g.size());
    const Matrix lap = laplacian(g).matrix;
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& a = agents[static_cast<std::size_t>(i)];
        const Complex row = gain * std::polar(std::pow(omega, -a.order),
                                              -(a.order * std::numbers::pi / 2.0 + omega * a.delay));
        for (Eigen::Index k = 0; k < n; ++k)
            m(i, k) = row * lap(i, k);
    }
    return m;
}

/// A branch of the eigen-loci crossing the real axis between two grid samples.
struct LocusCrossing {
    double omega = 0.0;
    double point = 0.0; ///< real-axis intercept
    std::size_t branch = 0;
    bool left_of_minus_one = false;
};

struct EigenLoci {
    std::vector<double> omegas;
    /// eigenvalues[w][b]: branch b at omegas[w], branches matched across samples.
    std::vector<std::vector<Complex>> eigenvalues;
    std::vector<LocusCrossing> crossings;
    /// Grid frequencies at which the eigen-solver failed; skipped in the loci.
    std::vector<double> failed_omegas;

    [[nodiscard]] bool encircles_minus_one() const {
        return std::any_of(crossings.begin(), crossings.end(),
                           [](const LocusCrossing& c) { return c.left_of_minus_one; });
    }
};

namespace detail {

/// Reorders `current` so entry b is the nearest unclaimed value to previous[b].
inline std::vector<Complex> match_branches(const std::vector<Complex>& previous, std::vector<Complex> current) {
    const std::size_t n = current.size();
    struct Pair {
        double dist;
        std::size_t prev, cur;
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t c = 0; c < n; ++c)
            pairs.push_back({std::abs(previous[p] - current[c]), p, c});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.dist < y.dist; });
    std::vector<Complex> out(n);
    std::vector<char> prev_done(n), cur_done(n);
    for (const auto& pr : pairs) {
        if (prev_done[pr.prev] || cur_done[pr.cur])
            continue;
        out[pr.prev] = current[pr.cur];
        prev_done[pr.prev] = cur_done[pr.cur] = 1;
    }
    return out;
}

} // namespace detail

/// Eigenvalues of G(j omega) over the grid and every sign change of a branch's
/// imaginary part. A crossing whose intercept lies left of -1 is flagged as
/// evidence that the Nyquist loci encircle -1 + j0.
inline EigenLoci eigen_loci(const Digraph& g, std::span<const AgentModel> agents, double gain,
                            const OmegaGrid& grid, std::size_t max_size = 64) {
    detail::require_agents(g, agents);
    if (g.size() > max_size)
        throw InvalidArgument("eigen_loci: system exceeds the dense cap");
    const std::size_t n = g.size();
    EigenLoci loci;
    Eigen::ComplexEigenSolver<ComplexMatrix> solver;

    for (double omega : grid.values) {
        solver.compute(return_matrix(omega, g, agents, gain), /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) {
            loci.failed_omegas.push_back(omega);
            continue;
        }
        std::vector<Complex> values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
        if (!loci.eigenvalues.empty())
            values = detail::match_branches(loci.eigenvalues.back(), std::move(values));
        loci.omegas.push_back(omega);
        loci.eigenvalues.push_back(std::move(values));
    }

    // last sample per branch whose imaginary part is clearly nonzero
    std::vector<std::optional<std::size_t>> anchor(n);
    for (std::size_t w = 0; w < loci.omegas.size(); ++w) {
        double scale = 1.0;
        for (const auto& v : loci.eigenvalues[w])
            scale = std::max(scale, std::abs(v));
        const double noise = 1e-9 * scale;
        for (std::size_t b = 0; b < n; ++b) {
            const Complex cur = loci.eigenvalues[w][b];
            if (std::abs(cur.imag()) <= noise)
                continue;
            if (anchor[b]) {
                const Complex prev = loci.eigenvalues[*anchor[b]][b];
                if ((prev.imag() < 0.0) != (cur.imag() < 0.0)) {
                    const double f = prev.imag() / (prev.imag() - cur.imag());
                    LocusCrossing c;
                    c.branch = b;
                    c.omega = loci.omegas[*anchor[b]] + f * (loci.omegas[w] - loci.omegas[*anchor[b]]);
                    c.point = prev.real() + f * (cur.real() - prev.real());
                    c.left_of_minus_one = c.point < -1.0;
                    loci.crossings.push_back(c);
                }
            }
            anchor[b] = w;
        }
    }
    return loci;
}

/// ((2 - order) pi / (2 tau))^order for fractional agents, pi / (2 tau) at order 1;
/// scales the agent's diagonal locus so it passes through -1 + j0.
inline double crossing_scale(double order, double delay) {
    if (!(order > 0.0 && order <= 1.0))
        throw InvalidArgument("crossing_scale: order must lie in (0, 1]");
    if (!(delay > 0.0))
        throw InvalidArgument("crossing_scale: delay must be positive");
    if (order == 1.0)
        return std::numbers::pi / (2.0 * delay);
    return std::pow((2.0 - order) * std::numbers::pi / (2.0 * delay), order);
}

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass:
        return "Pass";
    case Verdict::Fail:
        return "Fail";
    case Verdict::Inconclusive:
        return "Inconclusive";
    }
    return "?";
}

struct CertificateResult {
    CriterionResult criterion;
    std::vector<DiscMargin> disc_margins;
    std::vector<LocusCrossing> loci_crossings;
    std::vector<double> failed_omegas;
    Verdict verdict = Verdict::Inconclusive;
};

/// Pass when the critical-frequency disc check passes, Fail when a locus
/// crosses the real axis left of -1, otherwise Inconclusive.
inline CertificateResult certify(const Scenario& s, const OmegaGridOptions& grid_opts = {}) {
    validate(s);
    const auto agents = agents_by_index(s);
    const auto grid = make_omega_grid(agents, grid_opts);
    CertificateResult r;
    r.criterion = delay_criterion(s.graph, agents, s.gain);
    r.disc_margins = disc_margin(s.graph, agents, s.gain, grid);
    auto loci = eigen_loci(s.graph, agents, s.gain, grid);
    r.loci_crossings = std::move(loci.crossings);
    r.failed_omegas = std::move(loci.failed_omegas);
    const bool encircles = std::any_of(r.loci_crossings.begin(), r.loci_crossings.end(),
                                       [](const LocusCrossing& c) { return c.left_of_minus_one; });
    if (r.criterion.pass)
        r.verdict = Verdict::Pass;
    else if (encircles)
        r.verdict = Verdict::Fail;
    else
        r.verdict = Verdict::Inconclusive;
    return r;
}

} // namespace fracon
