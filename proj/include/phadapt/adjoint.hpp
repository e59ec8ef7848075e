#pragma once

// Discrete adjoint of the implicit Euler scheme. The block system is the exact
// transpose of the forward block matrix:
//
//   (I - h_M A^T) lambda_M = l_M
//   (I - h_i A^T) lambda_i = lambda_{i+1} + l_i,    i = M-1, ..., 1
//                 lambda_0 = lambda_1 + l_0
//
// Dropping the coupling -I blocks gives a block-diagonal system whose blocks
// can be solved independently (one block-Jacobi sweep from zero). Repeating
// the sweep converges in M+1 iterations because the iteration matrix is
// nilpotent.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "phadapt/forward.hpp"
#include "phadapt/qoi.hpp"

namespace phadapt {

enum class AdjointMethod { exact, jacobi_one_shot, jacobi_iterated };

struct AdjointSolution {
    GridFunction lambda;
    AdjointMethod method = AdjointMethod::exact;
    int sweeps = 0;  // block-Jacobi sweeps; 0 for the exact solve
};

namespace detail {

inline void require_rhs(const PHSystem& sys, const TimeGrid& grid, const AdjointRHS& rhs) {
    if (rhs.node_loads.size() != grid.node_count()) {
        throw DimensionMismatch("adjoint: " + std::to_string(rhs.node_loads.size()) + " node loads for " +
                                std::to_string(grid.node_count()) + " nodes");
    }
    for (const auto& l : rhs.node_loads) {
        if (l.size() != sys.state_dim()) throw DimensionMismatch("adjoint: node load has wrong length");
    }
}

inline FactorCache& cache_for(const TimeGrid& grid, FactorCache* shared, FactorCache& local) {
    FactorCache& cache = shared ? *shared : local;
    cache.prepare(grid);
    return cache;
}

}  // namespace detail

/// Block matrix of the discrete adjoint operator, assembled row by row from
/// node test functions: row 0 is [I, -I], row i (1 <= i < M) has
/// (I - h_i A^T) on the diagonal and -I to the right, row M is (I - h_M A^T).
inline Matrix adjoint_block_matrix(const PHSystem& sys, const TimeGrid& grid) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index M = static_cast<Eigen::Index>(grid.intervals());
    const Matrix At = sys.A().transpose();
    Matrix m = Matrix::Zero((M + 1) * n, (M + 1) * n);
    m.block(0, 0, n, n) = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i <= M; ++i) {
        if (i < M) m.block(i * n, (i + 1) * n, n, n) = -Matrix::Identity(n, n);
        if (i == 0) continue;
        const double h = grid.width(static_cast<std::size_t>(i));
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) m(i * n + r, i * n + c) = (r == c ? 1.0 : 0.0) - h * At(r, c);
        }
    }
    return m;
}

inline Vector stack(const std::vector<Vector>& blocks) {
    const Eigen::Index n = blocks.empty() ? 0 : blocks.front().size();
    Vector v(static_cast<Eigen::Index>(blocks.size()) * n);
    for (std::size_t i = 0; i < blocks.size(); ++i) v.segment(static_cast<Eigen::Index>(i) * n, n) = blocks[i];
    return v;
}

/// Back substitution through the transposed forward factors.
inline AdjointSolution solve_adjoint_exact(const PHSystem& sys, const TimeGrid& grid, const AdjointRHS& rhs,
                                           FactorCache* shared_cache = nullptr) {
    detail::require_rhs(sys, grid, rhs);
    FactorCache local(sys.A());
    const FactorCache& cache = detail::cache_for(grid, shared_cache, local);
    const std::size_t M = grid.intervals();
    std::vector<Vector> lam(M + 1);
    lam[M] = cache.at(grid.width(M)).solve_transposed(rhs.node_loads[M]);
    for (std::size_t i = M - 1; i >= 1; --i) {
        lam[i] = cache.at(grid.width(i)).solve_transposed(lam[i + 1] + rhs.node_loads[i]);
    }
    lam[0] = lam[1] + rhs.node_loads[0];
    return {GridFunction(grid, std::move(lam)), AdjointMethod::exact, 0};
}

/// k block-Jacobi sweeps from zero. Blocks within a sweep run in parallel.
inline AdjointSolution solve_adjoint_jacobi_iterated(const PHSystem& sys, const TimeGrid& grid, const AdjointRHS& rhs,
                                                     int sweeps, FactorCache* shared_cache = nullptr) {
    if (sweeps < 1) throw InvalidArgument("solve_adjoint_jacobi_iterated: need at least one sweep");
    detail::require_rhs(sys, grid, rhs);
    FactorCache local(sys.A());
    const FactorCache& cache = detail::cache_for(grid, shared_cache, local);
    const std::size_t M = grid.intervals();
    const Eigen::Index n = sys.state_dim();

    std::vector<Vector> prev(M + 1, Vector::Zero(n));
    std::vector<Vector> next(M + 1);
    for (int k = 0; k < sweeps; ++k) {
        parallel_for(M + 1, [&](std::size_t i) {
            Vector b = rhs.node_loads[i];
            if (i < M) b += prev[i + 1];
            next[i] = i == 0 ? b : cache.at(grid.width(i)).solve_transposed(b);
        });
        std::swap(prev, next);
    }
    return {GridFunction(grid, std::move(prev)),
            sweeps == 1 ? AdjointMethod::jacobi_one_shot : AdjointMethod::jacobi_iterated, sweeps};
}

/// One block-Jacobi sweep: every interval sees only its own load.
inline AdjointSolution solve_adjoint_jacobi(const PHSystem& sys, const TimeGrid& grid, const AdjointRHS& rhs,
                                            FactorCache* shared_cache = nullptr) {
    return solve_adjoint_jacobi_iterated(sys, grid, rhs, 1, shared_cache);
}

/// Load vector with a single nonzero entry `magnitude` in component
/// `component` of node `node`.
inline AdjointRHS localized_load(const TimeGrid& grid, Eigen::Index n, std::size_t node, Eigen::Index component,
                                 double magnitude) {
    if (node >= grid.node_count()) throw IndexOutOfRange("localized_load: node index out of range");
    if (component < 0 || component >= n) throw IndexOutOfRange("localized_load: component out of range");
    AdjointRHS rhs;
    rhs.node_loads.assign(grid.node_count(), Vector::Zero(n));
    rhs.node_loads[node](component) = magnitude;
    return rhs;
}

struct StabilityReport {
    ComplexVector eigenvalues_of_A;
    bool is_hurwitz = false;
    /// rho((I - h_i A^T)^{-1}) for each cell i = 1..M (index i-1).
    std::vector<double> contraction_factors;
    /// -max Re mu(A).
    double analytic_omega = 0.0;
    /// Least-squares fit of log ||lambda - lambda~|| = log C - omega (T - t)
    /// for a terminal perturbation on the given grid.
    double fitted_omega = 0.0;
    double fitted_constant = 1.0;
};

/// Spectral radius of (I - h A^T)^{-1}.
inline double step_contraction_factor(const Matrix& A, double h) {
    const Eigen::Index n = A.rows();
    const Matrix inv = lu_factor(Matrix::Identity(n, n) - h * A.transpose()).decomposition().inverse();
    return spectral_radius(inv).value;
}

inline StabilityReport stability_report(const PHSystem& sys, const TimeGrid& grid) {
    StabilityReport rep;
    rep.eigenvalues_of_A = eigenvalues(sys.A());
    const double max_re = rep.eigenvalues_of_A.real().maxCoeff();
    rep.is_hurwitz = max_re < -1e-12;
    rep.analytic_omega = -max_re;

    std::map<double, double> by_width;
    for (std::size_t i = 1; i <= grid.intervals(); ++i) {
        const double h = grid.width(i);
        auto it = by_width.find(h);
        if (it == by_width.end()) it = by_width.emplace(h, step_contraction_factor(sys.A(), h)).first;
        rep.contraction_factors.push_back(it->second);
    }

    // Probe: unit terminal load; the Jacobi solution keeps only lambda_M, so
    // the difference is the backward transport of lambda_M.
    const std::size_t M = grid.intervals();
    const Eigen::Index n = sys.state_dim();
    AdjointRHS probe;
    probe.node_loads.assign(M + 1, Vector::Zero(n));
    probe.node_loads[M] = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
    FactorCache cache(sys.A());
    const auto exact = solve_adjoint_exact(sys, grid, probe, &cache);
    const auto jacobi = solve_adjoint_jacobi(sys, grid, probe, &cache);
    const double terminal = exact.lambda[M].norm();

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t i = 1; i < M; ++i) {
        const double d = (exact.lambda[i] - jacobi.lambda[i]).norm();
        if (!(d > 0.0) || !(terminal > 0.0)) continue;
        const double x = grid.horizon() - grid.node(i);
        const double y = std::log(d / terminal);
        if (!std::isfinite(y)) continue;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    const double denom = static_cast<double>(count) * sxx - sx * sx;
    if (count >= 2 && denom > 0.0) {
        const double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
        rep.fitted_omega = -slope;
        rep.fitted_constant = std::exp((sy - slope * sx) / static_cast<double>(count));
    } else {
        rep.fitted_omega = rep.analytic_omega;
        rep.fitted_constant = 1.0;
    }
    return rep;
}

}  // namespace phadapt
