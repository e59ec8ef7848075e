#pragma once

// The three-dimensional benchmark system with its two dissipation matrices,
// and the step-input scenario used throughout the experiments.

#include <optional>
#include <string>
#include <string_view>

#include "phadapt/ph_core.hpp"

namespace phadapt::presets {

inline Matrix structure_matrix() {
    Matrix J(3, 3);
    J << 0, 0, 1,
         0, 0, -1,
         -1, 1, 0;
    return J;
}

inline Matrix dissipation_r1() {
    Matrix R(3, 3);
    R << 1, 1, 0,
         1, 1, 0,
         0, 0, 0;
    return R;
}

inline Matrix input_matrix() {
    Matrix B(3, 1);
    B << 1, 1, 0;
    return B;
}

inline PHSystem paper_r1() { return {structure_matrix(), dissipation_r1(), Matrix::Identity(3, 3), input_matrix()}; }

inline PHSystem paper_r2() {
    return {structure_matrix(), Matrix::Identity(3, 3), Matrix::Identity(3, 3), input_matrix()};
}

inline PHSystem paper_10r2() {
    return {structure_matrix(), 10.0 * Matrix::Identity(3, 3), Matrix::Identity(3, 3), input_matrix()};
}

/// "paper-R1", "paper-R2" or "paper-10R2"; nullopt for unknown names.
inline std::optional<PHSystem> by_name(std::string_view name) {
    if (name == "paper-R1") return paper_r1();
    if (name == "paper-R2") return paper_r2();
    if (name == "paper-10R2") return paper_10r2();
    return std::nullopt;
}

inline constexpr double kStepHorizon = 10.0;
inline constexpr double kStepTime = 5.0;
inline constexpr double kStepHeight = 10.0;

inline Vector step_initial_state() { return Vector{{1.0, 2.0, 1.0}}; }

/// u = 0 on [0, 5], u = 10 on (5, 10].
inline InputSignal step_input() {
    return InputSignal({0.0, kStepTime, kStepHorizon}, {Vector::Zero(1), Vector::Constant(1, kStepHeight)});
}

}  // namespace phadapt::presets
