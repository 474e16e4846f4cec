// Shared helpers for the unit tests: random inputs and Eigen-based oracles.

#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>
#include <doctest.h>

#include "qts/numkit.hpp"

namespace qts::test {

using EMatrix = Eigen::MatrixXcd;

inline EMatrix to_eigen(const ComplexMatrix& m) {
    EMatrix e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline ComplexMatrix from_eigen(const EMatrix& e) {
    ComplexMatrix m(e.rows(), e.cols());
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
    std::normal_distribution<double> n;
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = cplx(n(gen), n(gen));
    return m;
}

/// Ginibre-distributed density matrix G G^dagger / Tr.
inline ComplexMatrix random_state(std::size_t dim, std::mt19937_64& gen) {
    const ComplexMatrix g = random_matrix(dim, dim, gen);
    ComplexMatrix rho = g * g.adjoint();
    rho *= 1.0 / rho.trace().real();
    return rho;
}

/// Relative comparison: |a - b| < rel * max(|a|, |b|).
inline doctest::Approx rel_approx(double value, double rel) { return doctest::Approx(value).epsilon(rel).scale(0.0); }

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return max_abs(a - b); }

/// Smallest eigenvalue of the Hermitian part.
inline double min_eigenvalue(const ComplexMatrix& rho) {
    const EMatrix e = to_eigen(rho);
    Eigen::SelfAdjointEigenSolver<EMatrix> es(0.5 * (e + e.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline ComplexMatrix sigma_x() { return ComplexMatrix(2, 2, {0, 1, 1, 0}); }
inline ComplexMatrix sigma_y() { return ComplexMatrix(2, 2, {0, cplx(0, -1), cplx(0, 1), 0}); }
inline ComplexMatrix sigma_z() { return ComplexMatrix(2, 2, {1, 0, 0, -1}); }

} // namespace qts::test
