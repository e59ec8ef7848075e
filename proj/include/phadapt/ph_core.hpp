#pragma once

// Port-Hamiltonian system data, time grids, input signals and grid functions,
// plus the Hamiltonian and the terms of the power balance
//   d/dt H(x) = u^T y - x^T Q R Q x,   y = B^T Q x.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phadapt/errors.hpp"
#include "phadapt/numerics.hpp"

namespace phadapt {

/// Linear port-Hamiltonian system x' = (J - R) Q x + B u, y = B^T Q x.
class PHSystem {
public:
    /// Validates skew-symmetry of J, symmetry and semidefiniteness of R and Q,
    /// and the shape of B. Violations raise ConfigError naming the matrix.
    PHSystem(Matrix J, Matrix R, Matrix Q, Matrix B)
        : J_(std::move(J)), R_(std::move(R)), Q_(std::move(Q)), B_(std::move(B)) {
        validate();
        A_ = (J_ - R_) * Q_;
    }

    Eigen::Index state_dim() const { return J_.rows(); }
    Eigen::Index input_dim() const { return B_.cols(); }

    const Matrix& J() const { return J_; }
    const Matrix& R() const { return R_; }
    const Matrix& Q() const { return Q_; }
    const Matrix& B() const { return B_; }
    /// Cached system matrix A = (J - R) Q.
    const Matrix& A() const { return A_; }

    Vector output(const Vector& x) const {
        require_state(x, "output");
        return B_.transpose() * (Q_ * x);
    }

    void require_state(const Vector& x, const char* what) const {
        if (x.size() != state_dim()) {
            throw DimensionMismatch(std::string(what) + ": state has length " + std::to_string(x.size()) +
                                    ", system dimension is " + std::to_string(state_dim()));
        }
    }

private:
    static void check_square(const Matrix& m, Eigen::Index n, const char* field) {
        if (m.rows() != n || m.cols() != n) {
            throw ConfigError(field, "expected " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        }
        if (!m.allFinite()) throw ConfigError(field, "non-finite entry");
    }

    static void check_symmetric_psd(const Matrix& m, const char* field) {
        const double tol = 1e-12 * std::max(1.0, max_abs(m));
        if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > tol) {
            throw ConfigError(field, "matrix is not symmetric");
        }
        if (m.size() == 0) return;
        const double min_eig = symmetric_eigen(m).values.minCoeff();
        if (min_eig < -tol) {
            throw ConfigError(field, "matrix is not positive semidefinite (min eigenvalue " +
                                         std::to_string(min_eig) + ")");
        }
    }

    void validate() const {
        const Eigen::Index n = J_.rows();
        if (n == 0) throw ConfigError("J", "empty structure matrix");
        check_square(J_, n, "J");
        check_square(R_, n, "R");
        check_square(Q_, n, "Q");
        if (B_.rows() != n) {
            throw ConfigError("B", "expected " + std::to_string(n) + " rows, got " + std::to_string(B_.rows()));
        }
        if (!B_.allFinite()) throw ConfigError("B", "non-finite entry");
        // Skewness is checked in the infinity norm.
        const double skew = (J_ + J_.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
        if (skew > 1e-12 * std::max(1.0, max_abs(J_))) {
            throw ConfigError("J", "matrix is not skew-symmetric (||J + J^T||_inf = " + std::to_string(skew) + ")");
        }
        check_symmetric_psd(R_, "R");
        check_symmetric_psd(Q_, "Q");
    }

    Matrix J_, R_, Q_, B_, A_;
};

/// Strictly increasing nodes 0 = t_0 < t_1 < ... < t_M = T. Cells are
/// (t_{i-1}, t_i] for i = 1..M.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2) throw InvalidArgument("TimeGrid: need at least two nodes");
        if (nodes_.front() != 0.0) throw InvalidArgument("TimeGrid: first node must be 0");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!std::isfinite(nodes_[i])) throw InvalidArgument("TimeGrid: non-finite node");
            if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
                throw InvalidArgument("TimeGrid: nodes must be strictly increasing (index " + std::to_string(i) + ")");
            }
        }
    }

    static TimeGrid uniform(double T, std::size_t intervals) {
        if (intervals == 0) throw InvalidArgument("TimeGrid::uniform: need at least one interval");
        if (!(T > 0.0)) throw InvalidArgument("TimeGrid::uniform: horizon must be positive");
        std::vector<double> nodes(intervals + 1);
        for (std::size_t i = 0; i <= intervals; ++i) {
            nodes[i] = T * static_cast<double>(i) / static_cast<double>(intervals);
        }
        nodes.back() = T;
        return TimeGrid(std::move(nodes));
    }

    /// Number of cells M.
    std::size_t intervals() const { return nodes_.size() - 1; }
    std::size_t node_count() const { return nodes_.size(); }
    double horizon() const { return nodes_.back(); }
    double node(std::size_t i) const { return nodes_[i]; }
    /// Width h_i of cell i, 1 <= i <= M.
    double width(std::size_t i) const { return nodes_[i] - nodes_[i - 1]; }
    const std::vector<double>& nodes() const { return nodes_; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> nodes_;
};

/// Input u(t). Piecewise constant with value k on (b_k, b_{k+1}] (the first
/// segment also owns t = b_0), or an arbitrary sampled function.
class InputSignal {
public:
    InputSignal(std::vector<double> breakpoints, std::vector<Vector> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size()) {
            throw InvalidArgument("InputSignal: need K+1 breakpoints for K segment values");
        }
        for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
            if (!(breakpoints_[k] > breakpoints_[k - 1])) {
                throw InvalidArgument("InputSignal: breakpoints must be strictly increasing");
            }
        }
        dim_ = values_.front().size();
        for (const auto& v : values_) {
            if (v.size() != dim_) throw DimensionMismatch("InputSignal: segment values differ in length");
            if (!v.allFinite()) throw InvalidArgument("InputSignal: non-finite value");
        }
    }

    static InputSignal constant(double T, Vector value) { return InputSignal({0.0, T}, {std::move(value)}); }

    static InputSignal zero(double T, Eigen::Index m) { return constant(T, Vector::Zero(m)); }

    /// Arbitrary signal on [0, T]. Not accepted by the exact reference solver.
    static InputSignal sampled(double T, Eigen::Index m, std::function<Vector(double)> fn) {
        InputSignal s({0.0, T}, {Vector::Zero(m)});
        s.sampler_ = std::move(fn);
        return s;
    }

    Eigen::Index dim() const { return dim_; }
    bool is_piecewise_constant() const { return !sampler_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<Vector>& values() const { return values_; }
    double start() const { return breakpoints_.front(); }
    double end() const { return breakpoints_.back(); }

    /// Index of the segment owning t.
    std::size_t segment(double t) const {
        if (!(t >= breakpoints_.front() && t <= breakpoints_.back())) {
            throw OutOfDomain("eval_input: t = " + std::to_string(t) + " outside [" +
                              std::to_string(breakpoints_.front()) + ", " + std::to_string(breakpoints_.back()) + "]");
        }
        if (t == breakpoints_.front()) return 0;
        const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    }

    Vector operator()(double t) const {
        const std::size_t k = segment(t);
        if (sampler_) {
            Vector v = sampler_(t);
            if (v.size() != dim_) throw DimensionMismatch("InputSignal: sampler returned wrong length");
            return v;
        }
        return values_[k];
    }

private:
    std::vector<double> breakpoints_;
    std::vector<Vector> values_;
    Eigen::Index dim_ = 0;
    std::function<Vector(double)> sampler_;
};

inline Vector eval_input(const InputSignal& u, double t) { return u(t); }

/// One vector per grid node. Used for the discrete state and the adjoint.
class GridFunction {
public:
    GridFunction(TimeGrid grid, std::vector<Vector> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.node_count()) {
            throw DimensionMismatch("GridFunction: " + std::to_string(values_.size()) + " values for " +
                                    std::to_string(grid_.node_count()) + " nodes");
        }
        const Eigen::Index n = values_.front().size();
        for (const auto& v : values_) {
            if (v.size() != n) throw DimensionMismatch("GridFunction: node values differ in length");
            if (!v.allFinite()) throw NumericError("GridFunction: non-finite node value");
        }
    }

    static GridFunction zeros(const TimeGrid& grid, Eigen::Index n) {
        return GridFunction(grid, std::vector<Vector>(grid.node_count(), Vector::Zero(n)));
    }

    const TimeGrid& grid() const { return grid_; }
    Eigen::Index dim() const { return values_.front().size(); }
    std::size_t size() const { return values_.size(); }
    const Vector& operator[](std::size_t i) const { return values_[i]; }
    const std::vector<Vector>& values() const { return values_; }
    /// Jump value_{i+1} - value_i.
    Vector jump(std::size_t i) const { return values_[i + 1] - values_[i]; }

private:
    TimeGrid grid_;
    std::vector<Vector> values_;
};

/// Discrete state x_0..x_M with outputs y_i = B^T Q x_i.
class StateTrajectory {
public:
    StateTrajectory(const PHSystem& sys, GridFunction state) : state_(std::move(state)) {
        if (state_.dim() != sys.state_dim()) throw DimensionMismatch("StateTrajectory: state dimension mismatch");
        outputs_.reserve(state_.size());
        for (const auto& x : state_.values()) outputs_.push_back(sys.output(x));
    }

    const GridFunction& state() const { return state_; }
    const TimeGrid& grid() const { return state_.grid(); }
    const Vector& operator[](std::size_t i) const { return state_[i]; }
    const Vector& output(std::size_t i) const { return outputs_[i]; }
    std::size_t size() const { return state_.size(); }

private:
    GridFunction state_;
    std::vector<Vector> outputs_;
};

/// H(x) = x^T Q x / 2.
inline double hamiltonian(const PHSystem& sys, const Vector& x) {
    sys.require_state(x, "hamiltonian");
    return 0.5 * x.dot(sys.Q() * x);
}

/// x^T Q R Q x, the dissipated power ||R^{1/2} Q x||^2 as a quadratic form.
inline double dissipation_rate(const PHSystem& sys, const Vector& x) {
    sys.require_state(x, "dissipation_rate");
    const Vector qx = sys.Q() * x;
    return qx.dot(sys.R() * qx);
}

/// sqrt(v^T Q v).
inline double q_norm(const PHSystem& sys, const Vector& v) {
    return std::sqrt(std::max(0.0, v.dot(sys.Q() * v)));
}

/// H(x(t)) - H(x(s)) - int_s^t (u^T y - x^T QRQ x) dtau for a densely sampled
/// trajectory; states between nodes are linearly interpolated and the
/// integral uses the composite trapezoidal rule on the samples.
inline double continuous_energy_residual(const PHSystem& sys, const StateTrajectory& traj, const InputSignal& u,
                                         double s, double t) {
    const TimeGrid& grid = traj.grid();
    if (!(s < t) || s < 0.0 || t > grid.horizon()) {
        throw OutOfDomain("continuous_energy_residual: need 0 <= s < t <= T");
    }
    auto state_at = [&](double tau) -> Vector {
        const auto& nodes = grid.nodes();
        auto it = std::lower_bound(nodes.begin(), nodes.end(), tau);
        const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
        if (nodes[j] == tau) return traj[j];
        const double w = (tau - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
        return (1.0 - w) * traj[j - 1] + w * traj[j];
    };
    auto power = [&](double tau, const Vector& x) {
        return u(tau).dot(sys.output(x)) - dissipation_rate(sys, x);
    };

    std::vector<std::pair<double, Vector>> samples;
    samples.emplace_back(s, state_at(s));
    for (std::size_t j = 0; j < grid.node_count(); ++j) {
        if (grid.node(j) > s && grid.node(j) < t) samples.emplace_back(grid.node(j), traj[j]);
    }
    samples.emplace_back(t, state_at(t));

    double integral = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const auto& [ta, xa] = samples[k - 1];
        const auto& [tb, xb] = samples[k];
        integral += 0.5 * (tb - ta) * (power(ta, xa) + power(tb, xb));
    }
    return hamiltonian(sys, samples.back().second) - hamiltonian(sys, samples.front().second) - integral;
}

}  // namespace phadapt
