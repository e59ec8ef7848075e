#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "phadapt/forward.hpp"
#include "phadapt/presets.hpp"

using namespace phadapt;

namespace {

PHSystem scalar_decay() {
    return {Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Zero(1, 1)};
}

PHSystem zero_system(int n, int m) {
    return {Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Identity(n, n), Matrix::Ones(n, m)};
}

}  // namespace

TEST(SolveForward, ScalarSingleStep) {
    const auto out = solve_forward(scalar_decay(), TimeGrid({0.0, 0.5}), InputSignal::zero(0.5, 1), Vector::Ones(1));
    EXPECT_EQ(out.trajectory[0](0), 1.0);
    EXPECT_NEAR(out.trajectory[1](0), 2.0 / 3.0, 1e-15);
}

TEST(SolveForward, ZeroDynamicsKeepState) {
    const auto x0 = presets::step_initial_state();
    const auto out = solve_forward(zero_system(3, 1), TimeGrid::uniform(3.0, 7), InputSignal::zero(3.0, 1), x0);
    for (std::size_t i = 0; i < out.trajectory.size(); ++i) EXPECT_EQ(out.trajectory[i], x0);
}

TEST(SolveForward, SatisfiesBlockSystem) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 4;
        const auto sys = oracle::random_system(rng, n, 2);
        const auto grid = oracle::random_grid(rng, 2.0, 9);
        const InputSignal u({0.0, 0.7, 2.0}, oracle::random_vectors(rng, 2, 2));
        const Vector x0 = oracle::random_vectors(rng, 1, n)[0];
        const auto fwd = solve_forward(sys, grid, u, x0);
        EXPECT_EQ(fwd.trajectory[0], x0);

        // Independent dense solve of the whole block system.
        const Vector stacked = oracle::dense_solve(forward_block_matrix(sys, grid), forward_block_rhs(sys, grid, u, x0));
        for (std::size_t i = 0; i < fwd.trajectory.size(); ++i) {
            const Vector ref = stacked.segment(static_cast<Eigen::Index>(i) * n, n);
            EXPECT_LE((fwd.trajectory[i] - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
        }
    }
}

TEST(SolveForward, DimensionErrors) {
    const auto sys = presets::paper_r1();
    const auto grid = TimeGrid::uniform(1.0, 3);
    EXPECT_THROW(solve_forward(sys, grid, InputSignal::zero(1.0, 1), Vector::Zero(2)), DimensionMismatch);
    EXPECT_THROW(solve_forward(sys, grid, InputSignal::zero(1.0, 2), Vector::Zero(3)), DimensionMismatch);
}

TEST(FactorCache, SharesWidthsAndSolvesAccurately) {
    const auto sys = presets::paper_r1();
    FactorCache cache(sys.A());
    cache.prepare(TimeGrid::uniform(10.0, 100));
    EXPECT_LE(cache.size(), 3u);
    const double h = 0.1;
    const Matrix m = Matrix::Identity(3, 3) - h * cache.system_matrix();
    std::mt19937_64 rng(2);
    const Vector b = oracle::random_vectors(rng, 1, 3)[0];
    EXPECT_LE((m * cache.get(h).solve(b) - b).norm(), 1e-10 * b.norm());
    EXPECT_LE((m.transpose() * cache.get(h).solve_transposed(b) - b).norm(), 1e-10 * b.norm());
}

TEST(SolveReference, ZeroDynamicsIsLinearInTime) {
    const Vector x0 = presets::step_initial_state();
    const auto sys = zero_system(3, 1);
    const auto grid = TimeGrid::uniform(2.0, 4);
    const auto traj = solve_reference(sys, grid, InputSignal::constant(2.0, Vector::Constant(1, 3.0)), x0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Vector expected = x0 + grid.node(i) * 3.0 * Vector::Ones(3);
        EXPECT_LE((traj[i] - expected).norm(), 1e-13);
    }
}

TEST(SolveReference, ConservativeFlowKeepsEnergy) {
    const PHSystem sys(presets::structure_matrix(), Matrix::Zero(3, 3), Matrix::Identity(3, 3), presets::input_matrix());
    const auto traj = solve_reference(sys, TimeGrid::uniform(10.0, 37), InputSignal::zero(10.0, 1),
                                      presets::step_initial_state());
    const double h0 = hamiltonian(sys, traj[0]);
    for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_NEAR(hamiltonian(sys, traj[i]), h0, 1e-10);
}

TEST(SolveReference, ScalarExponential) {
    const auto traj = solve_reference(scalar_decay(), TimeGrid({0.0, 1.0}), InputSignal::zero(1.0, 1), Vector::Ones(1));
    EXPECT_NEAR(traj[1](0), std::exp(-1.0), 1e-15);
}

TEST(SolveReference, BreakpointInsideCell) {
    // x' = -x + u with u = 0 on [0, 0.5], 1 on (0.5, 1]: x(1) = e^{-1} + 1 - e^{-0.5}.
    const PHSystem sys(Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    const InputSignal u({0.0, 0.5, 1.0}, {Vector::Zero(1), Vector::Ones(1)});
    const auto traj = solve_reference(sys, TimeGrid({0.0, 1.0}), u, Vector::Ones(1));
    EXPECT_NEAR(traj[1](0), std::exp(-1.0) + 1.0 - std::exp(-0.5), 1e-14);
    EXPECT_THROW(solve_reference(sys, TimeGrid({0.0, 1.0}),
                                 InputSignal::sampled(1.0, 1, [](double t) { return Vector::Constant(1, t); }),
                                 Vector::Ones(1)),
                 InvalidArgument);
}

TEST(SolveForward, StepScenarioFinalStateError) {
    const auto sys = presets::paper_r1();
    const auto u = presets::step_input();
    const auto x0 = presets::step_initial_state();
    auto final_error = [&](std::size_t M) {
        const auto grid = TimeGrid::uniform(presets::kStepHorizon, M);
        return (solve_forward(sys, grid, u, x0).trajectory[M] - solve_reference(sys, grid, u, x0)[M]).cwiseAbs().maxCoeff();
    };
    const double e1000 = final_error(1000);
    const double e2000 = final_error(2000);
    EXPECT_LT(e1000, 0.1);
    EXPECT_NEAR(e1000 / e2000, 2.0, 0.2);
}

TEST(SolveForward, ConvergenceOrderApproachesOne) {
    // The undamped modes of this system make coarse grids pre-asymptotic:
    // pairwise orders rise towards one as the grid is refined.
    const auto sys = presets::paper_r1();
    const auto u = presets::step_input();
    const auto x0 = presets::step_initial_state();
    std::vector<double> errors;
    for (std::size_t M : {100u, 200u, 400u, 800u, 1600u}) {
        const auto grid = TimeGrid::uniform(presets::kStepHorizon, M);
        errors.push_back(max_norm_error(solve_forward(sys, grid, u, x0).trajectory, solve_reference(sys, grid, u, x0)));
    }
    double previous_order = 0.0;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        EXPECT_LE(errors[k + 1], errors[k] + 1e-12);
        const double order = std::log2(errors[k] / errors[k + 1]);
        EXPECT_GT(order, previous_order);
        EXPECT_LE(order, 1.15);
        previous_order = order;
    }
    EXPECT_GE(previous_order, 0.85);
}

TEST(SolveForward, ClosedSystemDissipatesEnergy) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = oracle::random_system(rng, 4, 1);
        const auto grid = oracle::random_grid(rng, 5.0, 40);
        const auto traj = solve_forward(sys, grid, InputSignal::zero(5.0, 1), oracle::random_vectors(rng, 1, 4)[0]).trajectory;
        for (std::size_t i = 1; i < traj.size(); ++i) {
            EXPECT_LE(hamiltonian(sys, traj[i]), hamiltonian(sys, traj[i - 1]) + 1e-12);
        }
    }
}

TEST(MaxNormError, GridMismatch) {
    const auto sys = presets::paper_r1();
    const auto u = InputSignal::zero(1.0, 1);
    const auto a = solve_forward(sys, TimeGrid::uniform(1.0, 3), u, Vector::Ones(3)).trajectory;
    const auto b = solve_forward(sys, TimeGrid::uniform(1.0, 4), u, Vector::Ones(3)).trajectory;
    EXPECT_EQ(max_norm_error(a, a), 0.0);
    EXPECT_THROW(max_norm_error(a, b), GridMismatch);
}
