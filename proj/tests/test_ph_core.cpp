#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "phadapt/forward.hpp"
#include "phadapt/presets.hpp"

using namespace phadapt;

namespace {

PHSystem scalar_system(double j, double r, double q, double b) {
    return {Matrix::Constant(1, 1, j), Matrix::Constant(1, 1, r), Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, b)};
}

PHSystem with_q(const Matrix& Q) {
    return {Matrix::Zero(3, 3), Matrix::Zero(3, 3), Q, Matrix::Zero(3, 1)};
}

}  // namespace

TEST(PHSystem, PresetMatrices) {
    const auto s = presets::paper_r1();
    Matrix expected(3, 3);
    expected << -1, -1, 1, -1, -1, -1, -1, 1, 0;
    EXPECT_EQ(s.A(), expected);
    EXPECT_EQ(s.state_dim(), 3);
    EXPECT_EQ(s.input_dim(), 1);
    EXPECT_EQ(presets::paper_10r2().R(), 10.0 * Matrix::Identity(3, 3));
    EXPECT_TRUE(presets::by_name("paper-R2").has_value());
    EXPECT_FALSE(presets::by_name("paper-R3").has_value());
}

TEST(PHSystem, RejectsNonSkewJ) {
    Matrix J = presets::structure_matrix();
    J(0, 2) = 2.0;
    try {
        PHSystem(J, Matrix::Zero(3, 3), Matrix::Identity(3, 3), presets::input_matrix());
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "J");
    }
}

TEST(PHSystem, RejectsIndefiniteOrAsymmetricR) {
    Matrix R = Matrix::Identity(3, 3);
    R(0, 0) = -1.0;
    try {
        PHSystem(presets::structure_matrix(), R, Matrix::Identity(3, 3), presets::input_matrix());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "R");
    }
    Matrix Ra = Matrix::Zero(3, 3);
    Ra(0, 1) = 1.0;
    EXPECT_THROW(PHSystem(presets::structure_matrix(), Ra, Matrix::Identity(3, 3), presets::input_matrix()),
                 ConfigError);
}

TEST(PHSystem, RejectsBadQAndBShape) {
    try {
        PHSystem(presets::structure_matrix(), Matrix::Zero(3, 3), -Matrix::Identity(3, 3), presets::input_matrix());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "Q");
    }
    try {
        PHSystem(presets::structure_matrix(), Matrix::Zero(3, 3), Matrix::Identity(3, 3), Matrix::Ones(2, 1));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "B");
    }
    EXPECT_THROW(PHSystem(Matrix::Zero(3, 3), Matrix::Zero(2, 2), Matrix::Identity(3, 3), Matrix::Ones(3, 1)),
                 ConfigError);
}

TEST(PHSystem, DissipativityOfA) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 5;
        const auto sys = oracle::random_system(rng, n, 2);
        for (const auto& x : oracle::random_vectors(rng, 10, n)) {
            EXPECT_LE(x.dot(sys.Q() * sys.A() * x), 1e-12 * x.squaredNorm());
        }
    }
}

TEST(Hamiltonian, Examples) {
    EXPECT_DOUBLE_EQ(hamiltonian(presets::paper_r1(), presets::step_initial_state()), 3.0);
    EXPECT_EQ(hamiltonian(presets::paper_r1(), Vector::Zero(3)), 0.0);
    Matrix Q = Matrix::Zero(3, 3);
    Q(0, 0) = 2.0;
    EXPECT_DOUBLE_EQ(hamiltonian(with_q(Q), Vector{{3.0, 5.0, 7.0}}), 9.0);
    EXPECT_THROW(hamiltonian(presets::paper_r1(), Vector::Zero(2)), DimensionMismatch);
}

TEST(Hamiltonian, NonnegativeForPsdQ) {
    std::mt19937_64 rng(4);
    const auto sys = oracle::random_system(rng, 4, 1);
    for (const auto& x : oracle::random_vectors(rng, 50, 4)) EXPECT_GE(hamiltonian(sys, x), 0.0);
}

TEST(DissipationRate, Examples) {
    EXPECT_EQ(dissipation_rate(with_q(Matrix::Identity(3, 3)), Vector{{1.0, 2.0, 3.0}}), 0.0);
    EXPECT_DOUBLE_EQ(dissipation_rate(presets::paper_r2(), presets::step_initial_state()), 6.0);
    // x^T R1 x for x = (1,1,0): R1 x = (2,2,0), inner product 4.
    EXPECT_DOUBLE_EQ(dissipation_rate(presets::paper_r1(), Vector{{1.0, 1.0, 0.0}}), 4.0);
}

TEST(DissipationRate, MatchesSquareRootOracle) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = oracle::random_system(rng, 4, 1);
        const Matrix half = oracle::symmetric_sqrt(sys.R());
        for (const auto& x : oracle::random_vectors(rng, 5, 4)) {
            const double expected = (half * sys.Q() * x).squaredNorm();
            EXPECT_NEAR(dissipation_rate(sys, x), expected, 1e-10 * std::max(1.0, expected));
        }
    }
}

TEST(TimeGrid, UniformAndValidation) {
    const auto g = TimeGrid::uniform(10.0, 4);
    EXPECT_EQ(g.intervals(), 4u);
    EXPECT_EQ(g.node_count(), 5u);
    EXPECT_EQ(g.horizon(), 10.0);
    EXPECT_DOUBLE_EQ(g.width(2), 2.5);
    EXPECT_THROW(TimeGrid({0.0}), InvalidArgument);
    EXPECT_THROW(TimeGrid({0.0, 1.0, 1.0}), InvalidArgument);
    EXPECT_THROW(TimeGrid({0.5, 1.0}), InvalidArgument);
    EXPECT_THROW(TimeGrid::uniform(1.0, 0), InvalidArgument);
}

TEST(InputSignal, StepInputHalfOpenSegments) {
    const auto u = presets::step_input();
    EXPECT_EQ(eval_input(u, 0.0)(0), 0.0);
    EXPECT_EQ(eval_input(u, 5.0)(0), 0.0);
    EXPECT_EQ(eval_input(u, 5.01)(0), 10.0);
    EXPECT_EQ(eval_input(u, 10.0)(0), 10.0);
    EXPECT_THROW(eval_input(u, 10.5), OutOfDomain);
    EXPECT_THROW(eval_input(u, -0.1), OutOfDomain);
}

TEST(InputSignal, ConstantAndPiecewise) {
    const auto c = InputSignal::constant(2.0, Vector{{1.5, -2.0}});
    for (double t : {0.0, 0.3, 1.0, 2.0}) EXPECT_EQ(c(t), (Vector{{1.5, -2.0}}));
    const InputSignal p({0.0, 1.0, 2.0, 3.0}, {Vector::Constant(1, 1.0), Vector::Constant(1, 2.0), Vector::Constant(1, 3.0)});
    EXPECT_EQ(p(0.5)(0), 1.0);
    EXPECT_EQ(p(1.0)(0), 1.0);
    EXPECT_EQ(p(1.0 + 1e-12)(0), 2.0);
    EXPECT_EQ(p(2.7)(0), 3.0);
    EXPECT_TRUE(p.is_piecewise_constant());
    EXPECT_THROW(InputSignal({0.0, 1.0}, {}), InvalidArgument);
    EXPECT_THROW(InputSignal({0.0, 1.0, 0.5}, {Vector::Zero(1), Vector::Zero(1)}), InvalidArgument);
}

TEST(StateTrajectory, OutputsRecomputable) {
    std::mt19937_64 rng(12);
    const auto sys = oracle::random_system(rng, 3, 2);
    const auto grid = oracle::random_grid(rng, 1.0, 6);
    const auto xs = oracle::random_vectors(rng, 7, 3);
    const StateTrajectory traj(sys, GridFunction(grid, xs));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_LE((traj.output(i) - sys.B().transpose() * sys.Q() * xs[i]).cwiseAbs().maxCoeff(), 1e-13);
    }
    EXPECT_THROW(GridFunction(grid, std::vector<Vector>(3, Vector::Zero(3))), DimensionMismatch);
}

TEST(ContinuousEnergyResidual, ConservativeReferenceFlow) {
    const PHSystem sys(presets::structure_matrix(), Matrix::Zero(3, 3), Matrix::Identity(3, 3), presets::input_matrix());
    const auto grid = TimeGrid::uniform(2.0, 2000);
    const auto u = InputSignal::zero(2.0, 1);
    const auto traj = solve_reference(sys, grid, u, presets::step_initial_state());
    EXPECT_LE(std::abs(continuous_energy_residual(sys, traj, u, 0.0, 2.0)), 1e-8);
    EXPECT_LE(std::abs(continuous_energy_residual(sys, traj, u, 0.3, 1.7)), 1e-8);
}

TEST(ContinuousEnergyResidual, ConstantEquilibrium) {
    const auto sys = scalar_system(0.0, 0.0, 1.0, 1.0);
    const auto grid = TimeGrid::uniform(1.0, 5);
    const StateTrajectory traj(sys, GridFunction(grid, std::vector<Vector>(6, Vector::Constant(1, 3.0))));
    EXPECT_EQ(continuous_energy_residual(sys, traj, InputSignal::zero(1.0, 1), 0.0, 1.0), 0.0);
}

TEST(ContinuousEnergyResidual, CoarseImplicitEulerViolatesBalance) {
    const auto sys = presets::paper_r1();
    const auto grid = TimeGrid::uniform(10.0, 10);
    const auto u = presets::step_input();
    const auto fwd = solve_forward(sys, grid, u, presets::step_initial_state());
    EXPECT_GT(std::abs(continuous_energy_residual(sys, fwd.trajectory, u, 0.0, 10.0)), 1e-3);
    EXPECT_THROW(continuous_energy_residual(sys, fwd.trajectory, u, 2.0, 1.0), OutOfDomain);
    EXPECT_THROW(continuous_energy_residual(sys, fwd.trajectory, u, 0.0, 11.0), OutOfDomain);
}
