#pragma once

// Energy-balance quantities of interest on a discrete trajectory and their
// derivative with respect to the node values (the adjoint right-hand side).
//
// Per cell (t_{i-1}, t_i], with right-endpoint quadrature,
//   r_i = h_i (-u_i^T y_i + x_i^T QRQ x_i) + H(x_i) - H(x_{i-1}),
// and
//   global:          (sum_i r_i)^2
//   local:           sum_i r_i^2
//   local_weighted:  sum_i r_i^2 + rho sum_i h_i |x_i|^2

#include <string>
#include <string_view>
#include <vector>

#include "phadapt/parallel.hpp"
#include "phadapt/ph_core.hpp"

namespace phadapt {

enum class QoiKind { global, local, local_weighted };

inline std::string_view to_string(QoiKind k) {
    switch (k) {
        case QoiKind::global: return "global";
        case QoiKind::local: return "local";
        case QoiKind::local_weighted: return "local_weighted";
    }
    return "unknown";
}

struct QoIConfig {
    QoiKind kind = QoiKind::local;
    double rho = 0.0;  // only read for local_weighted

    void validate() const {
        if (!(rho >= 0.0)) throw InvalidArgument("QoIConfig: rho must be nonnegative");
    }

    friend bool operator==(const QoIConfig&, const QoIConfig&) = default;
};

struct LocalResiduals {
    std::vector<double> r;  // r[i-1] belongs to cell i

    double sum() const {
        double s = 0.0;
        for (double v : r) s += v;
        return s;
    }

    /// I_loc = sum of squared residuals.
    double sum_of_squares() const {
        double s = 0.0;
        for (double v : r) s += v * v;
        return s;
    }
};

/// Node loads l_0..l_M of the adjoint system.
struct AdjointRHS {
    std::vector<Vector> node_loads;
};

namespace detail {
inline void require_matching(const PHSystem& sys, const StateTrajectory& traj, const InputSignal& u) {
    if (traj[0].size() != sys.state_dim()) throw DimensionMismatch("trajectory dimension does not match system");
    if (u.dim() != sys.input_dim()) throw DimensionMismatch("input dimension does not match system");
}
}  // namespace detail

inline LocalResiduals qoi_local_residuals(const PHSystem& sys, const StateTrajectory& traj, const InputSignal& u) {
    detail::require_matching(sys, traj, u);
    const TimeGrid& grid = traj.grid();
    LocalResiduals res;
    res.r.resize(grid.intervals());
    parallel_for(grid.intervals(), [&](std::size_t j) {
        const std::size_t i = j + 1;
        const double h = grid.width(i);
        const Vector ui = u(grid.node(i));
        res.r[j] = h * (-ui.dot(traj.output(i)) + dissipation_rate(sys, traj[i])) + hamiltonian(sys, traj[i]) -
                   hamiltonian(sys, traj[i - 1]);
    });
    return res;
}

inline double qoi_global(const PHSystem& sys, const StateTrajectory& traj, const InputSignal& u) {
    const double s = qoi_local_residuals(sys, traj, u).sum();
    return s * s;
}

/// Piecewise-constant L2 norm squared, sum_i h_i |x_i|^2.
inline double l2_norm_squared(const StateTrajectory& traj) {
    const TimeGrid& grid = traj.grid();
    double s = 0.0;
    for (std::size_t i = 1; i <= grid.intervals(); ++i) s += grid.width(i) * traj[i].squaredNorm();
    return s;
}

inline double qoi_total(const PHSystem& sys, const StateTrajectory& traj, const InputSignal& u, const QoIConfig& cfg) {
    cfg.validate();
    switch (cfg.kind) {
        case QoiKind::global: return qoi_global(sys, traj, u);
        case QoiKind::local: return qoi_local_residuals(sys, traj, u).sum_of_squares();
        case QoiKind::local_weighted:
            return qoi_local_residuals(sys, traj, u).sum_of_squares() + cfg.rho * l2_norm_squared(traj);
    }
    return 0.0;
}

/// Gradient of qoi_total with respect to x_0..x_M.
inline AdjointRHS assemble_adjoint_rhs(const PHSystem& sys, const StateTrajectory& traj, const InputSignal& u,
                                       const QoIConfig& cfg) {
    cfg.validate();
    const LocalResiduals res = qoi_local_residuals(sys, traj, u);
    const TimeGrid& grid = traj.grid();
    const std::size_t M = grid.intervals();
    const Matrix& Q = sys.Q();
    const Matrix qrq = Q * sys.R() * Q;
    const Matrix qb = Q * sys.B();
    const double global_factor = 2.0 * res.sum();

    // Cell i contributes dr_i/dx_i to node i and dr_i/dx_{i-1} to node i-1.
    std::vector<Vector> to_right(M), to_left(M);
    parallel_for(M, [&](std::size_t j) {
        const std::size_t i = j + 1;
        const double h = grid.width(i);
        const double factor = cfg.kind == QoiKind::global ? global_factor : 2.0 * res.r[j];
        const Vector dri = h * (-(qb * u(grid.node(i))) + 2.0 * (qrq * traj[i])) + Q * traj[i];
        to_right[j] = factor * dri;
        to_left[j] = -factor * (Q * traj[i - 1]);
        if (cfg.kind == QoiKind::local_weighted) to_right[j] += 2.0 * cfg.rho * h * traj[i];
    });

    AdjointRHS rhs;
    rhs.node_loads.assign(M + 1, Vector::Zero(sys.state_dim()));
    for (std::size_t k = 0; k <= M; ++k) {
        if (k >= 1) rhs.node_loads[k] += to_right[k - 1];
        if (k < M) rhs.node_loads[k] += to_left[k];
    }
    return rhs;
}

}  // namespace phadapt
