#pragma once

// Dual-weighted residual indicators, Doerfler marking and bisection.
//
// The adjoint weight lambda - lambda_h is replaced by the difference between
// the piecewise linear interpolant of lambda_h and lambda_h itself, which on
// cell i is lambda_i - lambda_{i-1}. The indicator of cell i is
//
//   eta_i = | h_i/2 <-A x_i, dl_i> + <x_i - x_{i-1}, dl_i>
//             + h_i/2 (lambda_{i-1}^T B u(t_{i-1}) - lambda_i^T B u(t_i)) |
//
// with dl_i = lambda_i - lambda_{i-1}.

#include <algorithm>
#include <numeric>
#include <vector>

#include "phadapt/adjoint.hpp"

namespace phadapt {

struct IndicatorSet {
    std::vector<double> eta;  // eta[i-1] belongs to cell i
    double total = 0.0;
};

/// Sum of the indicators; the computable surrogate for |I(x) - I(x_h)|.
inline double estimator_total(const IndicatorSet& ind) {
    double s = 0.0;
    for (double e : ind.eta) s += e;
    return s;
}

inline IndicatorSet compute_indicators(const PHSystem& sys, const TimeGrid& grid, const StateTrajectory& traj,
                                       const AdjointSolution& lam, const InputSignal& u) {
    if (!(traj.grid() == grid) || !(lam.lambda.grid() == grid)) {
        throw GridMismatch("compute_indicators: trajectory, adjoint and grid must coincide");
    }
    if (lam.lambda.dim() != sys.state_dim()) throw DimensionMismatch("compute_indicators: adjoint dimension");
    const Matrix& A = sys.A();
    const Matrix& B = sys.B();

    IndicatorSet ind;
    ind.eta.resize(grid.intervals());
    parallel_for(grid.intervals(), [&](std::size_t j) {
        const std::size_t i = j + 1;
        const double h = grid.width(i);
        const Vector dl = lam.lambda[i] - lam.lambda[i - 1];
        const double value = 0.5 * h * (-(A * traj[i])).dot(dl) + (traj[i] - traj[i - 1]).dot(dl) +
                             0.5 * h *
                                 (lam.lambda[i - 1].dot(B * u(grid.node(i - 1))) -
                                  lam.lambda[i].dot(B * u(grid.node(i))));
        ind.eta[j] = std::abs(value);
    });
    ind.total = estimator_total(ind);
    return ind;
}

struct MarkingResult {
    std::vector<std::size_t> marked;  // 1-based cell indices, ascending
    double theta = 0.5;
    double covered_fraction = 0.0;
};

/// Greedy Doerfler marking: take cells by decreasing indicator (ties by lower
/// index) until their share of the total reaches theta.
inline MarkingResult doerfler_mark(const IndicatorSet& ind, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidTheta("doerfler_mark: theta must lie in (0, 1]");
    std::vector<std::size_t> order(ind.eta.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ind.eta[a] > ind.eta[b]; });

    // Summing in the greedy order makes the full prefix equal the total exactly.
    double total = 0.0;
    for (std::size_t j : order) total += ind.eta[j];

    MarkingResult res;
    res.theta = theta;
    if (!(total > 0.0)) {
        res.covered_fraction = 1.0;
        return res;
    }
    double covered = 0.0;
    for (std::size_t j : order) {
        if (covered / total >= theta) break;
        covered += ind.eta[j];
        res.marked.push_back(j + 1);
    }
    res.covered_fraction = covered / total;
    std::sort(res.marked.begin(), res.marked.end());
    return res;
}

/// Bisects every marked cell at its midpoint.
inline TimeGrid refine_grid(const TimeGrid& grid, const MarkingResult& marking) {
    std::vector<bool> split(grid.intervals() + 1, false);
    for (std::size_t i : marking.marked) {
        if (i < 1 || i > grid.intervals()) throw IndexOutOfRange("refine_grid: cell index " + std::to_string(i));
        split[i] = true;
    }
    std::vector<double> nodes;
    nodes.reserve(grid.node_count() + marking.marked.size());
    nodes.push_back(grid.node(0));
    for (std::size_t i = 1; i <= grid.intervals(); ++i) {
        if (split[i]) nodes.push_back(0.5 * (grid.node(i - 1) + grid.node(i)));
        nodes.push_back(grid.node(i));
    }
    return TimeGrid(std::move(nodes));
}

}  // namespace phadapt
