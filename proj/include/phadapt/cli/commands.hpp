#pragma once

// The four CLI commands. Each writes CSV files plus summary.txt and
// config_echo.json into the output directory and returns the bundle.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "phadapt/cli/config.hpp"
#include "phadapt/cli/csv.hpp"

namespace phadapt::cli {

namespace fs = std::filesystem;

struct OutputBundle {
    fs::path directory;
    std::vector<fs::path> files;
    std::string summary;
};

namespace detail {

inline fs::path prepare_directory(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

inline void finish(OutputBundle& bundle, const ExperimentConfig& cfg) {
    const fs::path echo = bundle.directory / "config_echo.json";
    write_text(echo, to_json(cfg).dump(2) + "\n");
    bundle.files.push_back(echo);
    const fs::path summary = bundle.directory / "summary.txt";
    write_text(summary, bundle.summary);
    bundle.files.push_back(summary);
}

inline std::vector<std::string> indexed(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> names;
    for (Eigen::Index i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
    return names;
}

/// t, x_1..x_n, y_1..y_m, H, r. The residual cell of row 0 is empty.
inline fs::path write_trajectory(const fs::path& dir, const PHSystem& sys, const StateTrajectory& traj,
                                 const InputSignal& u) {
    std::vector<std::string> header{"t"};
    for (auto& s : indexed("x_", sys.state_dim())) header.push_back(s);
    for (auto& s : indexed("y_", sys.input_dim())) header.push_back(s);
    header.push_back("H");
    header.push_back("r");
    const fs::path path = dir / "trajectory.csv";
    CsvWriter csv(path, header);
    const LocalResiduals res = qoi_local_residuals(sys, traj, u);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::vector<std::string> cells{format_number(traj.grid().node(i))};
        for (Eigen::Index k = 0; k < sys.state_dim(); ++k) cells.push_back(format_number(traj[i](k)));
        for (Eigen::Index k = 0; k < sys.input_dim(); ++k) cells.push_back(format_number(traj.output(i)(k)));
        cells.push_back(format_number(hamiltonian(sys, traj[i])));
        cells.push_back(i == 0 ? std::string() : format_number(res.r[i - 1]));
        csv.row(cells);
    }
    return path;
}

inline fs::path write_adjoint_components(const fs::path& dir, const AdjointSolution& lam) {
    std::vector<std::string> header{"t"};
    for (auto& s : indexed("lambda_", lam.lambda.dim())) header.push_back(s);
    const fs::path path = dir / "adjoint.csv";
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < lam.lambda.size(); ++i) {
        std::vector<double> row{lam.lambda.grid().node(i)};
        for (Eigen::Index k = 0; k < lam.lambda.dim(); ++k) row.push_back(lam.lambda[i](k));
        csv.numbers(row);
    }
    return path;
}

inline fs::path write_indicators(const fs::path& dir, const TimeGrid& grid, const IndicatorSet& ind,
                                 const MarkingResult& marking) {
    const fs::path path = dir / "indicators.csv";
    CsvWriter csv(path, {"interval", "t_left", "t_right", "eta", "marked"});
    std::vector<bool> marked(grid.intervals() + 1, false);
    for (std::size_t i : marking.marked) marked[i] = true;
    for (std::size_t i = 1; i <= grid.intervals(); ++i) {
        csv.row({std::to_string(i), format_number(grid.node(i - 1)), format_number(grid.node(i)),
                 format_number(ind.eta[i - 1]), marked[i] ? "1" : "0"});
    }
    return path;
}

inline fs::path write_records(const fs::path& dir, const std::string& name,
                              const std::vector<IterationRecord>& records) {
    const fs::path path = dir / name;
    CsvWriter csv(path, {"iter", "M", "estimator_total", "qoi", "I_loc", "I_loc_reference_gap", "trajectory_error",
                         "wall_ms"});
    for (const auto& r : records) {
        csv.row({std::to_string(r.iteration), std::to_string(r.M), format_number(r.estimator_total),
                 format_number(r.qoi_value), format_number(r.i_loc), format_number(r.i_loc_reference_gap()),
                 format_number(r.trajectory_error), format_number(r.wall_ms)});
    }
    return path;
}

inline std::string vector_text(const Vector& v) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << format_number(v(i));
    os << ")";
    return os.str();
}

}  // namespace detail

inline OutputBundle cmd_simulate(const ExperimentConfig& cfg) {
    const PHSystem sys = cfg.system();
    const InputSignal u = cfg.input_signal();
    const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.grid_intervals);
    const auto fwd = solve_forward(sys, grid, u, cfg.initial_state());

    OutputBundle bundle{detail::prepare_directory(cfg), {}, {}};
    bundle.files.push_back(detail::write_trajectory(bundle.directory, sys, fwd.trajectory, u));

    const LocalResiduals res = qoi_local_residuals(sys, fwd.trajectory, u);
    std::ostringstream s;
    s << "command: simulate\n"
      << "intervals: " << grid.intervals() << "\n"
      << "final_state: " << detail::vector_text(fwd.trajectory[grid.intervals()]) << "\n"
      << "H(0): " << format_number(hamiltonian(sys, fwd.trajectory[0])) << "\n"
      << "H(T): " << format_number(hamiltonian(sys, fwd.trajectory[grid.intervals()])) << "\n"
      << "I_loc: " << format_number(res.sum_of_squares()) << "\n"
      << "I_glob: " << format_number(res.sum() * res.sum()) << "\n";
    bundle.summary = s.str();
    detail::finish(bundle, cfg);
    return bundle;
}

/// Exact and block-Jacobi adjoints for a single localized load.
inline OutputBundle cmd_adjoint_compare(const ExperimentConfig& cfg) {
    const PHSystem sys = cfg.system();
    const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.grid_intervals);
    const auto node =
        static_cast<std::size_t>(std::llround(cfg.perturbation.time / cfg.T * static_cast<double>(grid.intervals())));
    const AdjointRHS rhs =
        localized_load(grid, sys.state_dim(), node, cfg.perturbation.component, cfg.perturbation.magnitude);
    FactorCache cache(sys.A());
    const auto exact = solve_adjoint_exact(sys, grid, rhs, &cache);
    const auto jacobi = solve_adjoint_jacobi(sys, grid, rhs, &cache);

    OutputBundle bundle{detail::prepare_directory(cfg), {}, {}};
    const fs::path path = bundle.directory / "adjoint.csv";
    {
        CsvWriter csv(path, {"t", "norm_lambda", "norm_lambda_tilde", "norm_diff"});
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            csv.numbers({grid.node(i), exact.lambda[i].norm(), jacobi.lambda[i].norm(),
                         (exact.lambda[i] - jacobi.lambda[i]).norm()});
        }
    }
    bundle.files.push_back(path);

    const StabilityReport rep = stability_report(sys, grid);
    std::ostringstream s;
    s << "command: adjoint-compare\n"
      << "intervals: " << grid.intervals() << "\n"
      << "load_node: " << node << " (t = " << format_number(grid.node(node)) << ")\n"
      << "eigenvalues_of_A:";
    for (Eigen::Index k = 0; k < rep.eigenvalues_of_A.size(); ++k) {
        s << " " << format_number(rep.eigenvalues_of_A(k).real()) << (rep.eigenvalues_of_A(k).imag() < 0 ? "" : "+")
          << format_number(rep.eigenvalues_of_A(k).imag()) << "i";
    }
    s << "\n"
      << "is_hurwitz: " << (rep.is_hurwitz ? "true" : "false") << "\n"
      << "analytic_omega: " << format_number(rep.analytic_omega) << "\n"
      << "fitted_omega: " << format_number(rep.fitted_omega) << "\n"
      << "fitted_C: " << format_number(rep.fitted_constant) << "\n";
    bundle.summary = s.str();
    detail::finish(bundle, cfg);
    return bundle;
}

inline OutputBundle cmd_adapt(const ExperimentConfig& cfg) {
    const PHSystem sys = cfg.system();
    const InputSignal u = cfg.input_signal();
    const AdaptiveRun run = run_adaptive(sys, u, cfg.initial_state(), cfg.T, cfg.run);

    OutputBundle bundle{detail::prepare_directory(cfg), {}, {}};
    const fs::path& dir = bundle.directory;
    bundle.files.push_back(detail::write_records(dir, "records.csv", run.iterations));
    bundle.files.push_back(detail::write_trajectory(dir, sys, run.final_trajectory, u));
    bundle.files.push_back(detail::write_adjoint_components(dir, run.final_adjoint));
    bundle.files.push_back(detail::write_indicators(dir, run.final_grid, run.final_indicators, run.final_marking));
    const fs::path grid_path = dir / "final_grid.csv";
    {
        CsvWriter csv(grid_path, {"t"});
        for (double t : run.final_grid.nodes()) csv.numbers({t});
    }
    bundle.files.push_back(grid_path);

    const auto& last = run.iterations.back();
    std::ostringstream s;
    s << "command: adapt\n"
      << "adjoint_mode: " << to_string(cfg.run.adjoint_mode) << "\n"
      << "qoi: " << to_string(cfg.run.qoi.kind) << "\n"
      << "iterations: " << run.iterations.size() << "\n"
      << "stop_reason: " << to_string(run.stop_reason) << "\n"
      << "final_M: " << last.M << "\n"
      << "final_estimator_total: " << format_number(last.estimator_total) << "\n"
      << "final_I_loc: " << format_number(last.i_loc) << "\n"
      << "final_trajectory_error: " << format_number(last.trajectory_error) << "\n";
    bundle.summary = s.str();
    detail::finish(bundle, cfg);
    return bundle;
}

inline OutputBundle cmd_compare(const ExperimentConfig& cfg) {
    const PHSystem sys = cfg.system();
    const InputSignal u = cfg.input_signal();
    const ComparisonTable table = compare_strategies(sys, u, cfg.initial_state(), cfg.T, cfg.run);

    OutputBundle bundle{detail::prepare_directory(cfg), {}, {}};
    const fs::path path = bundle.directory / "compare.csv";
    {
        CsvWriter csv(path, {"M", "I_loc_uniform", "I_loc_adaptive_exact", "I_loc_adaptive_jacobi", "jacobi_M",
                             "error_uniform", "error_adaptive_exact", "error_adaptive_jacobi", "lowest_violation"});
        for (const auto& r : table.rows) {
            csv.row({std::to_string(r.M), format_number(r.i_loc_uniform), format_number(r.i_loc_adaptive_exact),
                     r.jacobi_M ? format_number(r.i_loc_adaptive_jacobi) : std::string(),
                     r.jacobi_M ? std::to_string(r.jacobi_M) : std::string(), format_number(r.error_uniform),
                     format_number(r.error_adaptive_exact),
                     r.jacobi_M ? format_number(r.error_adaptive_jacobi) : std::string(), r.lowest_violation()});
        }
    }
    bundle.files.push_back(path);
    bundle.files.push_back(detail::write_records(bundle.directory, "records_exact.csv", table.adaptive_exact.iterations));
    bundle.files.push_back(
        detail::write_records(bundle.directory, "records_jacobi.csv", table.adaptive_jacobi.iterations));

    std::ostringstream s;
    s << "command: compare\n";
    for (const auto& r : table.rows) s << "M=" << r.M << ": lowest violation " << r.lowest_violation() << "\n";
    const auto& final_row = table.rows.back();
    s << "final matched M=" << final_row.M << ": lowest violation " << final_row.lowest_violation() << "\n";
    if (table.trade_off) {
        const auto& t = *table.trade_off;
        const bool better_error = t.weighted.trajectory_error <= t.unweighted.trajectory_error;
        const bool higher_violation = t.weighted.i_loc >= t.unweighted.i_loc;
        s << "trade-off (rho=" << format_number(t.rho) << ", M " << t.weighted.M << " vs " << t.unweighted.M
          << "): trajectory error " << format_number(t.weighted.trajectory_error) << " vs unweighted "
          << format_number(t.unweighted.trajectory_error) << " (" << (better_error ? "lower" : "higher")
          << "); I_loc " << format_number(t.weighted.i_loc) << " vs unweighted " << format_number(t.unweighted.i_loc)
          << " (" << (higher_violation ? "higher" : "lower") << ")\n";
    }
    bundle.summary = s.str();
    detail::finish(bundle, cfg);
    return bundle;
}

}  // namespace phadapt::cli
