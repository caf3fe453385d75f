#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracon/error.hpp"

namespace fracon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// One weighted edge in 0-based indices: `to` receives information from
/// `from` with weight `weight`, i.e. a(to, from) = weight.
struct Edge {
    std::size_t to;
    std::size_t from;
    double weight;
};

/// Directed weighted topology without self-loops.
///
/// Entry (i, k) of the weight matrix is a_ik, the weight agent i places on
/// information received from agent k. Immutable after construction.
class Digraph {
public:
    explicit Digraph(Matrix weights) : weights_(std::move(weights)) {
        if (weights_.rows() < 1 || weights_.rows() != weights_.cols())
            throw InvalidArgument("digraph weight matrix must be square with n >= 1");
        for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
            for (Eigen::Index k = 0; k < weights_.cols(); ++k) {
                const double w = weights_(i, k);
                if (!std::isfinite(w) || w < 0.0)
                    throw InvalidArgument("digraph weights must be finite and nonnegative");
                if (i == k && w != 0.0)
                    throw InvalidArgument("digraph must not contain self-loops");
            }
        }
    }

    static Digraph from_edges(std::size_t n, std::span<const Edge> edges) {
        if (n < 1)
            throw InvalidArgument("digraph needs at least one node");
        Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (const auto& e : edges) {
            if (e.to >= n || e.from >= n)
                throw InvalidArgument("edge endpoint out of range");
            w(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)) = e.weight;
        }
        return Digraph(std::move(w));
    }

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
    [[nodiscard]] double weight(std::size_t i, std::size_t k) const {
        return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }

    /// Nonzero entries in row-major order.
    [[nodiscard]] std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t k = 0; k < size(); ++k)
                if (weight(i, k) != 0.0)
                    out.push_back({i, k, weight(i, k)});
        return out;
    }

    /// Same topology with node p[i] of the result playing the role of node i here.
    [[nodiscard]] Digraph permuted(std::span<const std::size_t> p) const {
        const auto n = size();
        if (p.size() != n)
            throw InvalidArgument("permutation length must equal node count");
        Matrix w(weights_.rows(), weights_.cols());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                w(static_cast<Eigen::Index>(p[i]), static_cast<Eigen::Index>(p[k])) = weight(i, k);
        return Digraph(std::move(w));
    }

    friend bool operator==(const Digraph& a, const Digraph& b) {
        return a.weights_.rows() == b.weights_.rows() && a.weights_ == b.weights_;
    }

private:
    Matrix weights_;
};

/// L = D - A together with the degree data it was built from.
struct LaplacianView {
    Matrix matrix;
    Vector degrees;
    double max_degree = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

struct Spectrum {
    std::vector<Complex> eigenvalues;
    double spectral_radius = 0.0;
    /// Largest real part; the largest eigenvalue when L is symmetric.
    double max_real_eigenvalue = 0.0;
    std::size_t zero_multiplicity = 0;
};

struct SpectrumOptions {
    /// Eigenvalues with modulus below this count as zero.
    double zero_tolerance = 1e-9;
    /// Dense eigen-decomposition is only offered at desk scale.
    std::size_t max_size = 64;
};

/// d_i = sum_k a_ik.
inline Vector degree_vector(const Digraph& g) { return g.weights().rowwise().sum(); }

inline LaplacianView laplacian(const Digraph& g) {
    LaplacianView view;
    view.degrees = degree_vector(g);
    view.max_degree = view.degrees.maxCoeff();
    view.matrix = -g.weights();
    view.matrix.diagonal() += view.degrees;
    return view;
}

/// Least node r from which every node is reachable along influence edges
/// k => i (present when a_ik > 0). This is the condition under which 0 is a
/// simple eigenvalue of L.
inline std::optional<std::size_t> spanning_root(const Digraph& g) {
    const auto n = g.size();
    std::vector<char> seen(n);
    for (std::size_t root = 0; root < n; ++root) {
        std::fill(seen.begin(), seen.end(), 0);
        std::queue<std::size_t> frontier;
        frontier.push(root);
        seen[root] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const auto from = frontier.front();
            frontier.pop();
            for (std::size_t to = 0; to < n; ++to) {
                if (!seen[to] && g.weight(to, from) > 0.0) {
                    seen[to] = 1;
                    ++reached;
                    frontier.push(to);
                }
            }
        }
        if (reached == n)
            return root;
    }
    return std::nullopt;
}

inline bool has_spanning_root(const Digraph& g) { return spanning_root(g).has_value(); }

/// Exact comparison of stored weights.
inline bool is_symmetric(const Digraph& g) { return g.weights() == g.weights().transpose(); }

inline Spectrum spectrum(const LaplacianView& lap, const SpectrumOptions& opts = {}) {
    const auto n = lap.size();
    if (n > opts.max_size)
        throw InvalidArgument("spectrum: n = " + std::to_string(n) + " exceeds the dense cap of " +
                              std::to_string(opts.max_size));

    Eigen::EigenSolver<Matrix> solver(lap.matrix, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw ComputationError("spectrum: eigenvalue iteration did not converge");

    Spectrum out;
    out.eigenvalues.reserve(n);
    out.max_real_eigenvalue = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const Complex lambda = solver.eigenvalues()(i);
        out.eigenvalues.push_back(lambda);
        out.spectral_radius = std::max(out.spectral_radius, std::abs(lambda));
        out.max_real_eigenvalue = std::max(out.max_real_eigenvalue, lambda.real());
        if (std::abs(lambda) < opts.zero_tolerance)
            ++out.zero_multiplicity;
    }
    return out;
}

inline Spectrum spectrum(const Digraph& g, const SpectrumOptions& opts = {}) {
    return spectrum(laplacian(g), opts);
}

} // namespace fracon
