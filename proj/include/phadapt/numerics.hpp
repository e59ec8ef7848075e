#pragma once

// Dense linear algebra used by the solvers and by the reference (oracle)
// computations: LU with factorization reuse, the matrix exponential,
// symmetric eigen-decomposition and spectral radii.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "phadapt/errors.hpp"

namespace phadapt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch(std::string(what) + ": expected a square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

inline void require_finite(const Matrix& m, const char* what) {
    if (!all_finite(m)) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

/// LU factors with partial pivoting, PA = LU. Solves with the matrix and with
/// its transpose, so one factorization of (I - hA) also serves (I - hA^T).
class LUFactors {
public:
    LUFactors() = default;

    explicit LUFactors(const Matrix& m) : lu_(m) {}

    Eigen::Index dim() const { return lu_.rows(); }

    Vector solve(const Vector& b) const {
        check(b);
        return lu_.solve(b);
    }

    Vector solve_transposed(const Vector& b) const {
        check(b);
        return lu_.transpose().solve(b);
    }

    const Eigen::PartialPivLU<Matrix>& decomposition() const { return lu_; }

private:
    void check(const Vector& b) const {
        if (b.size() != dim()) {
            throw DimensionMismatch("lu_solve: right-hand side has length " + std::to_string(b.size()) +
                                    ", factors have dimension " + std::to_string(dim()));
        }
    }

    Eigen::PartialPivLU<Matrix> lu_;
};

/// Factorizes a square matrix. Throws SingularMatrix when a pivot falls below
/// 1e-14 times the largest entry magnitude.
inline LUFactors lu_factor(const Matrix& m) {
    require_square(m, "lu_factor");
    require_finite(m, "lu_factor");
    const double scale = max_abs(m);
    if (scale == 0.0) throw SingularMatrix("lu_factor: zero matrix");
    LUFactors f(m);
    const auto& packed = f.decomposition().matrixLU();
    const double threshold = 1e-14 * scale;
    for (Eigen::Index i = 0; i < packed.rows(); ++i) {
        if (!(std::abs(packed(i, i)) >= threshold)) {
            throw SingularMatrix("lu_factor: pivot " + std::to_string(i) + " below threshold");
        }
    }
    return f;
}

inline Vector lu_solve(const LUFactors& f, const Vector& b) { return f.solve(b); }

/// Largest argument norm accepted by matrix_exponential (1-norm of t*m).
inline constexpr double kExpmNormLimit = 700.0;

/// e^{t m} by scaling and squaring with a degree-13 Pade approximant.
inline Matrix matrix_exponential(const Matrix& m, double t = 1.0) {
    require_square(m, "matrix_exponential");
    const Eigen::Index n = m.rows();
    const Matrix a = t * m;
    require_finite(a, "matrix_exponential");
    const double norm1 = n == 0 ? 0.0 : a.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 > kExpmNormLimit) {
        throw OverflowRisk("matrix_exponential: ||t m||_1 = " + std::to_string(norm1) + " exceeds supported range");
    }
    if (norm1 == 0.0) return Matrix::Identity(n, n);

    constexpr double theta13 = 5.371920351148152;
    int squarings = 0;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Matrix s = a / std::ldexp(1.0, squarings);

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    const Matrix id = Matrix::Identity(n, n);
    const Matrix s2 = s * s;
    const Matrix s4 = s2 * s2;
    const Matrix s6 = s4 * s2;
    const Matrix u_inner = s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 + b[3] * s2 + b[1] * id;
    const Matrix u = s * u_inner;
    const Matrix v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * id;

    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

struct SymmetricEigen {
    Vector values;   // ascending
    Matrix vectors;  // columns are orthonormal eigenvectors
};

inline SymmetricEigen symmetric_eigen(const Matrix& m) {
    require_square(m, "symmetric_eigen");
    require_finite(m, "symmetric_eigen");
    const double asym = m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, max_abs(m))) {
        throw NotSymmetric("symmetric_eigen: asymmetry " + std::to_string(asym));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
    if (solver.info() != Eigen::Success) throw NoConvergence("symmetric_eigen: solver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Complex spectrum of a general square matrix (Hessenberg QR).
inline ComplexVector eigenvalues(const Matrix& m) {
    require_square(m, "eigenvalues");
    require_finite(m, "eigenvalues");
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NoConvergence("eigenvalues: QR iteration did not converge");
    return solver.eigenvalues();
}

struct SpectralRadius {
    double value = 0.0;
    bool converged = true;
};

/// Largest eigenvalue magnitude. If the QR iteration fails, falls back to
/// power iteration and reports the best estimate with converged = false.
inline SpectralRadius spectral_radius(const Matrix& m) {
    require_square(m, "spectral_radius");
    require_finite(m, "spectral_radius");
    if (m.rows() == 0) return {};
    Eigen::EigenSolver<Matrix> solver(m, false);
    if (solver.info() == Eigen::Success) return {solver.eigenvalues().cwiseAbs().maxCoeff(), true};

    Vector v = Vector::Ones(m.rows()).normalized();
    double estimate = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return {0.0, true};
        estimate = norm;
        v = w / norm;
    }
    return {estimate, false};
}

}  // namespace phadapt
