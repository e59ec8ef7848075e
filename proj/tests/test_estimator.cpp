#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "phadapt/estimator.hpp"
#include "phadapt/presets.hpp"

using namespace phadapt;

namespace {

IndicatorSet indicators(std::vector<double> eta) {
    IndicatorSet s{std::move(eta), 0.0};
    s.total = estimator_total(s);
    return s;
}

AdjointSolution adjoint_of(const TimeGrid& grid, std::vector<Vector> values) {
    return {GridFunction(grid, std::move(values)), AdjointMethod::exact, 0};
}

}  // namespace

TEST(ComputeIndicators, ZeroAdjoint) {
    const auto sys = presets::paper_r1();
    const auto grid = TimeGrid::uniform(10.0, 8);
    const auto u = presets::step_input();
    const auto traj = solve_forward(sys, grid, u, presets::step_initial_state()).trajectory;
    const auto ind = compute_indicators(sys, grid, traj, adjoint_of(grid, std::vector<Vector>(9, Vector::Zero(3))), u);
    for (double e : ind.eta) EXPECT_EQ(e, 0.0);
    EXPECT_EQ(ind.total, 0.0);
}

TEST(ComputeIndicators, ConstantAdjointLeavesInputTerm) {
    const auto sys = presets::paper_r1();
    const auto grid = TimeGrid::uniform(10.0, 8);
    const auto u = presets::step_input();
    const auto traj = solve_forward(sys, grid, u, presets::step_initial_state()).trajectory;
    const Vector lam{{0.3, -1.2, 2.0}};
    const auto ind = compute_indicators(sys, grid, traj, adjoint_of(grid, std::vector<Vector>(9, lam)), u);
    for (std::size_t i = 1; i <= 8; ++i) {
        const double expected =
            0.5 * grid.width(i) * std::abs(lam.dot(sys.B() * (u(grid.node(i - 1)) - u(grid.node(i)))));
        EXPECT_NEAR(ind.eta[i - 1], expected, 1e-14);
    }
}

TEST(ComputeIndicators, ScalarHandExample) {
    const PHSystem sys(Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Zero(1, 1));
    const TimeGrid grid({0.0, 1.0});
    const StateTrajectory traj(sys, GridFunction(grid, {Vector::Constant(1, 1.0), Vector::Constant(1, 0.5)}));
    const auto lam = adjoint_of(grid, {Vector::Constant(1, 0.5), Vector::Constant(1, 1.0)});
    const auto ind = compute_indicators(sys, grid, traj, lam, InputSignal::zero(1.0, 1));
    // |(1/2)(+1/2)(1/2) + (-1/2)(1/2)| = 1/8
    EXPECT_DOUBLE_EQ(ind.eta[0], 0.125);
}

TEST(ComputeIndicators, GridMismatch) {
    const auto sys = presets::paper_r1();
    const auto u = presets::step_input();
    const auto g1 = TimeGrid::uniform(10.0, 4);
    const auto g2 = TimeGrid::uniform(10.0, 5);
    const auto traj = solve_forward(sys, g1, u, presets::step_initial_state()).trajectory;
    EXPECT_THROW(compute_indicators(sys, g1, traj, adjoint_of(g2, std::vector<Vector>(6, Vector::Zero(3))), u),
                 GridMismatch);
}

TEST(EstimatorTotal, Sums) {
    EXPECT_EQ(estimator_total(IndicatorSet{}), 0.0);
    EXPECT_EQ(estimator_total(indicators({1, 2, 3})), 6.0);
}

TEST(DoerflerMark, Examples) {
    const auto m = doerfler_mark(indicators({4, 3, 2, 1}), 0.5);
    EXPECT_EQ(m.marked, (std::vector<std::size_t>{1, 2}));
    EXPECT_NEAR(m.covered_fraction, 0.7, 1e-15);

    const auto all = doerfler_mark(indicators({0.0, 2.0, 0.0, 1.0}), 1.0);
    EXPECT_EQ(all.marked, (std::vector<std::size_t>{2, 4}));

    const auto ties = doerfler_mark(indicators(std::vector<double>(10, 1.0)), 0.5);
    EXPECT_EQ(ties.marked, (std::vector<std::size_t>{1, 2, 3, 4, 5}));

    EXPECT_THROW(doerfler_mark(indicators({1.0}), 0.0), InvalidTheta);
    EXPECT_THROW(doerfler_mark(indicators({1.0}), 1.5), InvalidTheta);
}

TEST(DoerflerMark, MinimalAndMonotone) {
    std::mt19937_64 rng(61);
    std::exponential_distribution<double> dist(1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> eta(25);
        for (auto& e : eta) e = dist(rng);
        const auto ind = indicators(eta);
        std::vector<std::size_t> previous;
        for (double theta : {0.1, 0.3, 0.5, 0.8, 1.0}) {
            const auto m = doerfler_mark(ind, theta);
            EXPECT_GE(m.covered_fraction, theta - 1e-15);
            double covered = 0.0, smallest = std::numeric_limits<double>::infinity();
            for (std::size_t i : m.marked) {
                covered += eta[i - 1];
                smallest = std::min(smallest, eta[i - 1]);
            }
            EXPECT_LT((covered - smallest) / ind.total, theta);
            EXPECT_TRUE(std::includes(m.marked.begin(), m.marked.end(), previous.begin(), previous.end()));
            previous = m.marked;
        }
    }
}

TEST(RefineGrid, Examples) {
    const TimeGrid g({0.0, 1.0, 2.0});
    MarkingResult m;
    m.marked = {1};
    EXPECT_EQ(refine_grid(g, m).nodes(), (std::vector<double>{0.0, 0.5, 1.0, 2.0}));

    const auto u = TimeGrid::uniform(4.0, 4);
    MarkingResult all;
    all.marked = {1, 2, 3, 4};
    EXPECT_EQ(refine_grid(u, all), TimeGrid::uniform(4.0, 8));

    EXPECT_EQ(refine_grid(g, MarkingResult{}), g);

    MarkingResult bad;
    bad.marked = {3};
    EXPECT_THROW(refine_grid(g, bad), IndexOutOfRange);
}

TEST(RefineGrid, KeepsOldNodes) {
    std::mt19937_64 rng(5);
    const auto g = oracle::random_grid(rng, 7.0, 15);
    MarkingResult m;
    m.marked = {1, 4, 15};
    const auto r = refine_grid(g, m);
    EXPECT_EQ(r.intervals(), 18u);
    EXPECT_TRUE(std::includes(r.nodes().begin(), r.nodes().end(), g.nodes().begin(), g.nodes().end()));
    EXPECT_EQ(r.node(0), 0.0);
    EXPECT_EQ(r.horizon(), 7.0);
}

TEST(ComputeIndicators, JacobiLocality) {
    const PHSystem sys(presets::structure_matrix(), presets::dissipation_r1(), Matrix::Identity(3, 3),
                       Matrix::Zero(3, 1));
    const auto grid = TimeGrid::uniform(10.0, 40);
    const auto u = InputSignal::zero(10.0, 1);
    const auto traj = solve_forward(sys, grid, u, presets::step_initial_state()).trajectory;
    const auto lam = solve_adjoint_jacobi(sys, grid, localized_load(grid, 3, 20, 0, 5.0));
    const auto ind = compute_indicators(sys, grid, traj, lam, u);
    for (std::size_t i = 1; i <= 40; ++i) {
        if (i == 20 || i == 21) {
            EXPECT_GT(ind.eta[i - 1], 0.0) << i;
        } else {
            EXPECT_EQ(ind.eta[i - 1], 0.0) << i;
        }
    }
}

TEST(ComputeIndicators, EffectivityOnStepScenario) {
    const auto sys = presets::paper_r1();
    const auto u = presets::step_input();
    const auto x0 = presets::step_initial_state();
    const auto grid = TimeGrid::uniform(10.0, 100);
    const auto traj = solve_forward(sys, grid, u, x0).trajectory;
    const auto ref = solve_reference(sys, grid, u, x0);
    const auto lam = solve_adjoint_exact(sys, grid, assemble_adjoint_rhs(sys, traj, u, {}));
    const double est = compute_indicators(sys, grid, traj, lam, u).total;
    const double truth = std::abs(qoi_total(sys, traj, u, {}) - qoi_total(sys, ref, u, {}));
    EXPECT_GE(est / truth, 0.1);
    EXPECT_LE(est / truth, 10.0);
}
