#pragma once

// Implicit Euler (dG(0)) forward solve
//   (I - h_i A) x_i = x_{i-1} + h_i B u(t_i),   x_0 = x^0,
// and the exact variation-of-constants reference for piecewise constant input.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "phadapt/numerics.hpp"
#include "phadapt/parallel.hpp"
#include "phadapt/ph_core.hpp"

namespace phadapt {

/// LU factors of (I - h A) keyed by step width. Widths that agree to about
/// 1e-14 relative share one factorization.
class FactorCache {
public:
    explicit FactorCache(Matrix A) : A_(std::move(A)) {}

    /// Factorizes every width of `grid` that is not cached yet. Distinct
    /// widths are factorized concurrently.
    void prepare(const TimeGrid& grid) {
        std::vector<std::pair<Key, double>> missing;
        for (std::size_t i = 1; i <= grid.intervals(); ++i) {
            const double h = grid.width(i);
            const Key k = key(h);
            if (factors_.count(k) == 0 &&
                std::none_of(missing.begin(), missing.end(), [&](const auto& e) { return e.first == k; })) {
                missing.emplace_back(k, h);
            }
        }
        std::vector<LUFactors> fresh(missing.size());
        parallel_for(missing.size(), [&](std::size_t j) { fresh[j] = factor(missing[j].second); });
        for (std::size_t j = 0; j < missing.size(); ++j) factors_.emplace(missing[j].first, std::move(fresh[j]));
    }

    /// Factors for width h; inserts on a miss (not thread-safe in that case).
    const LUFactors& get(double h) {
        const Key k = key(h);
        auto it = factors_.find(k);
        if (it == factors_.end()) it = factors_.emplace(k, factor(h)).first;
        return it->second;
    }

    /// Read-only lookup; the width must have been prepared.
    const LUFactors& at(double h) const {
        auto it = factors_.find(key(h));
        if (it == factors_.end()) throw InvalidArgument("FactorCache: width not prepared");
        return it->second;
    }

    const Matrix& system_matrix() const { return A_; }
    std::size_t size() const { return factors_.size(); }

private:
    using Key = std::pair<int, std::int64_t>;

    static Key key(double h) {
        int exponent = 0;
        const double mantissa = std::frexp(h, &exponent);
        return {exponent, static_cast<std::int64_t>(std::llround(std::ldexp(mantissa, 46)))};
    }

    LUFactors factor(double h) const {
        const Eigen::Index n = A_.rows();
        try {
            return lu_factor(Matrix::Identity(n, n) - h * A_);
        } catch (const SingularMatrix& e) {
            throw SingularStep(std::string("implicit Euler step matrix is singular for h = ") + std::to_string(h) +
                               " (" + e.what() + ")");
        }
    }

    Matrix A_;
    std::map<Key, LUFactors> factors_;
};

struct ForwardSolveArtifacts {
    StateTrajectory trajectory;
    FactorCache factors;
};

inline void require_input_dim(const PHSystem& sys, const InputSignal& u) {
    if (u.dim() != sys.input_dim()) {
        throw DimensionMismatch("input has dimension " + std::to_string(u.dim()) + ", system expects " +
                                std::to_string(sys.input_dim()));
    }
}

inline ForwardSolveArtifacts solve_forward(const PHSystem& sys, const TimeGrid& grid, const InputSignal& u,
                                           const Vector& x0) {
    sys.require_state(x0, "solve_forward");
    require_input_dim(sys, u);
    FactorCache cache(sys.A());
    cache.prepare(grid);

    std::vector<Vector> x;
    x.reserve(grid.node_count());
    x.push_back(x0);
    for (std::size_t i = 1; i <= grid.intervals(); ++i) {
        const double h = grid.width(i);
        const Vector rhs = x.back() + h * (sys.B() * u(grid.node(i)));
        x.push_back(cache.at(h).solve(rhs));
    }
    return {StateTrajectory(sys, GridFunction(grid, std::move(x))), std::move(cache)};
}

/// Exact flow maps over one width: e^{hA} and int_0^h e^{sA} ds, taken from
/// the exponential of the augmented matrix [[A, I], [0, 0]]. This stays valid
/// for singular A.
class PropagatorCache {
public:
    explicit PropagatorCache(Matrix A) : A_(std::move(A)) {}

    struct Propagator {
        Matrix flow;      // e^{hA}
        Matrix integral;  // int_0^h e^{sA} ds
    };

    const Propagator& get(double h) {
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        const Eigen::Index n = A_.rows();
        Matrix augmented = Matrix::Zero(2 * n, 2 * n);
        augmented.topLeftCorner(n, n) = A_;
        augmented.topRightCorner(n, n) = Matrix::Identity(n, n);
        const Matrix e = matrix_exponential(augmented, h);
        return cache_.emplace(h, Propagator{e.topLeftCorner(n, n), e.topRightCorner(n, n)}).first->second;
    }

private:
    Matrix A_;
    std::map<double, Propagator> cache_;
};

/// Exact solution at the grid nodes for piecewise constant input. Input
/// breakpoints inside a cell split the propagation.
inline StateTrajectory solve_reference(const PHSystem& sys, const TimeGrid& grid, const InputSignal& u,
                                       const Vector& x0, PropagatorCache* shared_cache = nullptr) {
    sys.require_state(x0, "solve_reference");
    require_input_dim(sys, u);
    if (!u.is_piecewise_constant()) throw InvalidArgument("solve_reference: input must be piecewise constant");
    PropagatorCache local(sys.A());
    PropagatorCache& cache = shared_cache ? *shared_cache : local;

    const auto& breaks = u.breakpoints();
    std::vector<Vector> x;
    x.reserve(grid.node_count());
    x.push_back(x0);
    for (std::size_t i = 1; i <= grid.intervals(); ++i) {
        const double a = grid.node(i - 1);
        const double b = grid.node(i);
        std::vector<double> cuts{a};
        for (double bp : breaks) {
            if (bp > a && bp < b) cuts.push_back(bp);
        }
        cuts.push_back(b);
        Vector state = x.back();
        for (std::size_t k = 1; k < cuts.size(); ++k) {
            const auto& p = cache.get(cuts[k] - cuts[k - 1]);
            // Constant on (cuts[k-1], cuts[k]]: sample at the right end.
            const Vector bu = sys.B() * u(cuts[k]);
            state = p.flow * state + p.integral * bu;
        }
        x.push_back(std::move(state));
    }
    return StateTrajectory(sys, GridFunction(grid, std::move(x)));
}

/// Dense block matrix of the forward scheme: identity in block (0,0), and
/// -I / (I - h_i A) in block row i. Size (M+1)n square.
inline Matrix forward_block_matrix(const PHSystem& sys, const TimeGrid& grid) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index M = static_cast<Eigen::Index>(grid.intervals());
    Matrix m = Matrix::Zero((M + 1) * n, (M + 1) * n);
    m.block(0, 0, n, n) = Matrix::Identity(n, n);
    for (Eigen::Index i = 1; i <= M; ++i) {
        const double h = grid.width(static_cast<std::size_t>(i));
        m.block(i * n, (i - 1) * n, n, n) = -Matrix::Identity(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) {
                m(i * n + r, i * n + c) = (r == c ? 1.0 : 0.0) - h * sys.A()(r, c);
            }
        }
    }
    return m;
}

/// Right-hand side (x^0, h_1 B u(t_1), ..., h_M B u(t_M)) of the block system.
inline Vector forward_block_rhs(const PHSystem& sys, const TimeGrid& grid, const InputSignal& u, const Vector& x0) {
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index M = static_cast<Eigen::Index>(grid.intervals());
    Vector rhs((M + 1) * n);
    rhs.segment(0, n) = x0;
    for (Eigen::Index i = 1; i <= M; ++i) {
        const auto k = static_cast<std::size_t>(i);
        rhs.segment(i * n, n) = grid.width(k) * (sys.B() * u(grid.node(k)));
    }
    return rhs;
}

/// Max over nodes of the infinity-norm difference.
inline double max_norm_error(const StateTrajectory& a, const StateTrajectory& b) {
    if (a.size() != b.size()) throw GridMismatch("max_norm_error: trajectories on different grids");
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return err;
}

}  // namespace phadapt
