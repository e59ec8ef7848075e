#pragma once

// Goal-oriented adaptive loop and the baselines it is compared against.
//
//   repeat: forward solve -> adjoint right-hand side -> adjoint solve
//           -> indicators -> stop? -> Doerfler marking -> bisection

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phadapt/estimator.hpp"

namespace phadapt {

enum class AdjointMode { exact, jacobi };

inline std::string_view to_string(AdjointMode m) { return m == AdjointMode::exact ? "exact" : "jacobi"; }

enum class StopReason { tol_reached, max_iters, max_intervals };

inline std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::tol_reached: return "tol_reached";
        case StopReason::max_iters: return "max_iters";
        case StopReason::max_intervals: return "max_intervals";
    }
    return "unknown";
}

struct RunConfig {
    QoIConfig qoi;
    double theta = 0.5;
    double tol = 0.0;
    std::size_t max_iters = 20;
    std::size_t max_intervals = 100000;
    AdjointMode adjoint_mode = AdjointMode::exact;
    std::size_t initial_M = 20;

    void validate() const {
        qoi.validate();
        if (!(theta > 0.0 && theta <= 1.0)) throw InvalidTheta("RunConfig: theta must lie in (0, 1]");
        if (!(tol >= 0.0)) throw InvalidArgument("RunConfig: tol must be nonnegative");
        if (initial_M < 2) throw InvalidArgument("RunConfig: initial_M must be at least 2");
        if (max_iters < 1) throw InvalidArgument("RunConfig: max_iters must be at least 1");
        if (max_intervals < initial_M) throw InvalidArgument("RunConfig: max_intervals below initial_M");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct IterationRecord {
    std::size_t iteration = 0;  // 1-based
    std::size_t M = 0;
    double estimator_total = 0.0;
    double qoi_value = 0.0;        // the configured QoI on x_h
    double i_loc = 0.0;            // sum of squared local residuals on x_h
    double i_loc_reference = 0.0;  // same functional on the exact solution sampled at the nodes
    double trajectory_error = 0.0; // max-norm error against the exact solution
    double wall_ms = 0.0;

    double i_loc_reference_gap() const { return std::abs(i_loc - i_loc_reference); }
};

struct AdaptiveRun {
    std::vector<IterationRecord> iterations;
    TimeGrid final_grid;
    StateTrajectory final_trajectory;
    AdjointSolution final_adjoint;
    IndicatorSet final_indicators;
    MarkingResult final_marking;  // empty unless the loop refined after the last record
    StopReason stop_reason = StopReason::max_iters;
};

/// Everything computed on one grid by one pass of the loop body.
struct GridEvaluation {
    StateTrajectory trajectory;
    AdjointSolution adjoint;
    IndicatorSet indicators;
    IterationRecord record;
};

inline GridEvaluation evaluate_grid(const PHSystem& sys, const InputSignal& u, const Vector& x0, const TimeGrid& grid,
                                    const QoIConfig& qoi, AdjointMode mode, PropagatorCache& reference_cache) {
    const auto start = std::chrono::steady_clock::now();
    auto fwd = solve_forward(sys, grid, u, x0);
    const AdjointRHS rhs = assemble_adjoint_rhs(sys, fwd.trajectory, u, qoi);
    AdjointSolution lam = mode == AdjointMode::exact ? solve_adjoint_exact(sys, grid, rhs, &fwd.factors)
                                                     : solve_adjoint_jacobi(sys, grid, rhs, &fwd.factors);
    IndicatorSet ind = compute_indicators(sys, grid, fwd.trajectory, lam, u);
    const auto stop = std::chrono::steady_clock::now();

    IterationRecord rec;
    rec.M = grid.intervals();
    rec.estimator_total = ind.total;
    rec.qoi_value = qoi_total(sys, fwd.trajectory, u, qoi);
    rec.i_loc = qoi_local_residuals(sys, fwd.trajectory, u).sum_of_squares();
    rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();

    const StateTrajectory reference = solve_reference(sys, grid, u, x0, &reference_cache);
    rec.i_loc_reference = qoi_local_residuals(sys, reference, u).sum_of_squares();
    rec.trajectory_error = max_norm_error(fwd.trajectory, reference);
    return {std::move(fwd.trajectory), std::move(lam), std::move(ind), rec};
}

inline AdaptiveRun run_adaptive(const PHSystem& sys, const InputSignal& u, const Vector& x0, double T,
                                const RunConfig& cfg) {
    cfg.validate();
    PropagatorCache reference_cache(sys.A());
    TimeGrid grid = TimeGrid::uniform(T, cfg.initial_M);
    std::vector<IterationRecord> records;

    for (std::size_t iter = 1;; ++iter) {
        GridEvaluation ev = evaluate_grid(sys, u, x0, grid, cfg.qoi, cfg.adjoint_mode, reference_cache);
        ev.record.iteration = iter;
        records.push_back(ev.record);

        auto finish = [&](StopReason reason, MarkingResult marking) {
            return AdaptiveRun{std::move(records), grid,          std::move(ev.trajectory), std::move(ev.adjoint),
                               std::move(ev.indicators), std::move(marking), reason};
        };
        if (ev.indicators.total <= cfg.tol) return finish(StopReason::tol_reached, {});
        if (iter >= cfg.max_iters) return finish(StopReason::max_iters, {});
        MarkingResult marking = doerfler_mark(ev.indicators, cfg.theta);
        if (grid.intervals() + marking.marked.size() > cfg.max_intervals) {
            return finish(StopReason::max_intervals, std::move(marking));
        }
        grid = refine_grid(grid, marking);
    }
}

/// Uniform grids with initial_M, 2 initial_M, 4 initial_M, ... intervals.
inline AdaptiveRun run_uniform(const PHSystem& sys, const InputSignal& u, const Vector& x0, double T,
                               std::size_t levels, std::size_t initial_M, const QoIConfig& qoi = {}) {
    if (levels < 1) throw InvalidArgument("run_uniform: need at least one level");
    if (initial_M < 1) throw InvalidArgument("run_uniform: need at least one interval");
    PropagatorCache reference_cache(sys.A());
    std::vector<IterationRecord> records;
    std::optional<GridEvaluation> last;
    std::optional<TimeGrid> last_grid;
    for (std::size_t level = 0; level < levels; ++level) {
        TimeGrid grid = TimeGrid::uniform(T, initial_M << level);
        GridEvaluation ev = evaluate_grid(sys, u, x0, grid, qoi, AdjointMode::exact, reference_cache);
        ev.record.iteration = level + 1;
        records.push_back(ev.record);
        last = std::move(ev);
        last_grid = std::move(grid);
    }
    return {std::move(records), *last_grid, std::move(last->trajectory), std::move(last->adjoint),
            std::move(last->indicators), {}, StopReason::max_iters};
}

struct ComparisonRow {
    std::size_t M = 0;  // interval count of the adaptive-exact iteration
    double i_loc_uniform = 0.0;
    double i_loc_adaptive_exact = 0.0;
    double i_loc_adaptive_jacobi = std::numeric_limits<double>::quiet_NaN();
    std::size_t jacobi_M = 0;  // 0 when no jacobi iteration fits under M
    double error_uniform = 0.0;
    double error_adaptive_exact = 0.0;
    double error_adaptive_jacobi = std::numeric_limits<double>::quiet_NaN();

    /// "uniform", "adaptive-exact" or "adaptive-jacobi"; ties go to the
    /// earlier name in that list.
    std::string lowest_violation() const {
        std::string best = "uniform";
        double value = i_loc_uniform;
        if (i_loc_adaptive_exact < value) {
            best = "adaptive-exact";
            value = i_loc_adaptive_exact;
        }
        if (!std::isnan(i_loc_adaptive_jacobi) && i_loc_adaptive_jacobi < value) best = "adaptive-jacobi";
        return best;
    }
};

/// Final records of a weighted run and of its unweighted counterpart with the
/// same budget.
struct TradeOff {
    double rho = 0.0;
    IterationRecord weighted;
    IterationRecord unweighted;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    AdaptiveRun adaptive_exact;
    AdaptiveRun adaptive_jacobi;
    std::optional<TradeOff> trade_off;
};

/// Rows are keyed by the interval counts of the adaptive run with exact
/// adjoints. The uniform column is solved at exactly that M; the jacobi column
/// takes the jacobi iteration with the largest M not exceeding it.
inline ComparisonTable compare_strategies(const PHSystem& sys, const InputSignal& u, const Vector& x0, double T,
                                          const RunConfig& cfg) {
    cfg.validate();
    RunConfig exact_cfg = cfg;
    exact_cfg.adjoint_mode = AdjointMode::exact;
    RunConfig jacobi_cfg = cfg;
    jacobi_cfg.adjoint_mode = AdjointMode::jacobi;
    const bool weighted = cfg.qoi.kind == QoiKind::local_weighted && cfg.qoi.rho > 0.0;
    RunConfig baseline_cfg = exact_cfg;
    baseline_cfg.qoi = QoIConfig{QoiKind::local, 0.0};

    std::vector<std::optional<AdaptiveRun>> runs(3);
    parallel_for(weighted ? 3 : 2, [&](std::size_t k) {
        const RunConfig& c = k == 0 ? exact_cfg : (k == 1 ? jacobi_cfg : baseline_cfg);
        runs[k] = run_adaptive(sys, u, x0, T, c);
    });

    ComparisonTable table{{}, std::move(*runs[0]), std::move(*runs[1]), std::nullopt};
    PropagatorCache reference_cache(sys.A());
    for (const auto& rec : table.adaptive_exact.iterations) {
        ComparisonRow row;
        row.M = rec.M;
        row.i_loc_adaptive_exact = rec.i_loc;
        row.error_adaptive_exact = rec.trajectory_error;
        const TimeGrid grid = TimeGrid::uniform(T, rec.M);
        const auto uniform = solve_forward(sys, grid, u, x0);
        row.i_loc_uniform = qoi_local_residuals(sys, uniform.trajectory, u).sum_of_squares();
        row.error_uniform = max_norm_error(uniform.trajectory, solve_reference(sys, grid, u, x0, &reference_cache));
        for (const auto& j : table.adaptive_jacobi.iterations) {
            if (j.M <= rec.M && j.M >= row.jacobi_M) {
                row.jacobi_M = j.M;
                row.i_loc_adaptive_jacobi = j.i_loc;
                row.error_adaptive_jacobi = j.trajectory_error;
            }
        }
        table.rows.push_back(row);
    }
    if (weighted) {
        table.trade_off = TradeOff{cfg.qoi.rho, table.adaptive_exact.iterations.back(), runs[2]->iterations.back()};
    }
    return table;
}

}  // namespace phadapt
