#include "qts/bases.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qts {

std::string to_string(BasisKind kind) {
    switch (kind) {
    case BasisKind::Eigen: return "eigen";
    case BasisKind::Decoherence: return "decoherence";
    case BasisKind::PlusMinus: return "pm";
    }
    return "unknown";
}

BasisKind basis_from_string(const std::string& name) {
    if (name == "eigen") return BasisKind::Eigen;
    if (name == "decoherence") return BasisKind::Decoherence;
    if (name == "pm") return BasisKind::PlusMinus;
    throw std::invalid_argument("unknown basis '" + name + "' (expected eigen, decoherence or pm)");
}

namespace {

double normality_defect(const ComplexMatrix& l) {
    const ComplexMatrix ld = l.adjoint();
    return max_abs(l * ld - ld * l);
}

bool is_diagonal(const ComplexMatrix& m, double tol) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > tol) return false;
    return true;
}

} // namespace

DiagonalizedLindblad diagonalize_lindblad(const ComplexMatrix& l) {
    if (!l.is_square()) throw std::invalid_argument("diagonalize_lindblad: operator is not square");
    const std::size_t n = l.rows();
    const double scale = std::max(1.0, frobenius_norm(l) * frobenius_norm(l));
    if (normality_defect(l) > 1e-10 * scale) {
        throw std::invalid_argument(
            "diagonalize_lindblad: operator is not normal, so no unitary decoherence basis "
            "exists (dissipation is not pure decoherence in any basis)");
    }

    DiagonalizedLindblad out;
    out.transform.to_label = "decoherence";
    if (is_diagonal(l, 1e-14 * std::sqrt(scale))) {
        out.transform.matrix = ComplexMatrix::identity(n);
        out.diagonal = l;
        return out;
    }

    const auto d = eig_general(l);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const cplx ea = d.eigenvalues[a], eb = d.eigenvalues[b];
        if (ea.real() != eb.real()) return ea.real() < eb.real();
        return ea.imag() < eb.imag();
    });

    // Orthonormalize; only eigenvectors inside a degenerate cluster are affected.
    ComplexMatrix v(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        ComplexVector col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = d.right(i, order[c]);
        for (std::size_t p = 0; p < c; ++p) {
            cplx proj{};
            for (std::size_t i = 0; i < n; ++i) proj += std::conj(v(i, p)) * col[i];
            for (std::size_t i = 0; i < n; ++i) col[i] -= proj * v(i, p);
        }
        const double nrm = norm2(col);
        std::size_t big = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(col[i]) > std::abs(col[big]) + 1e-14) big = i;
        const cplx phase = std::conj(col[big]) / std::abs(col[big]);
        for (std::size_t i = 0; i < n; ++i) v(i, c) = phase * col[i] / nrm;
    }

    out.transform.matrix = v;
    out.diagonal = v.adjoint() * l * v;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) out.diagonal(i, j) = 0.0;
    return out;
}

DiagonalizedLindblad diagonalize_lindblad_set(const std::vector<ComplexMatrix>& ops) {
    if (ops.empty()) throw std::invalid_argument("diagonalize_lindblad_set: no operators");
    for (std::size_t a = 0; a < ops.size(); ++a) {
        const double scale = std::max(1.0, frobenius_norm(ops[a]) * frobenius_norm(ops[a]));
        if (normality_defect(ops[a]) > 1e-10 * scale) {
            throw std::invalid_argument(
                "diagonalize_lindblad_set: collapse operators cannot be simultaneously "
                "diagonalized (operator " + std::to_string(a) + " is not normal)");
        }
        for (std::size_t b = a + 1; b < ops.size(); ++b) {
            if (max_abs(ops[a] * ops[b] - ops[b] * ops[a]) > 1e-10 * scale) {
                throw std::invalid_argument(
                    "diagonalize_lindblad_set: collapse operators do not commute and cannot be "
                    "simultaneously diagonalized");
            }
        }
    }
    return diagonalize_lindblad(ops.front());
}

BasisTransform v_model_pm_basis() {
    const double r = 1.0 / std::sqrt(2.0);
    BasisTransform b;
    b.matrix = ComplexMatrix(3, 3, {1.0, 0.0, 0.0,
                                    0.0, r, r,
                                    0.0, r, -r});
    b.to_label = "pm";
    return b;
}

BasisTransform basis_for(const Model& model, BasisKind kind) {
    switch (kind) {
    case BasisKind::Eigen: {
        BasisTransform b;
        b.matrix = ComplexMatrix::identity(model.dimension);
        return b;
    }
    case BasisKind::Decoherence:
        return diagonalize_lindblad_set(model.collapse_ops).transform;
    case BasisKind::PlusMinus:
        if (model.kind != ModelKind::VModel) {
            throw std::invalid_argument("the pm basis is defined for the V model only");
        }
        return v_model_pm_basis();
    }
    throw std::invalid_argument("basis_for: unknown basis");
}

ComplexMatrix transform_state(const ComplexMatrix& rho, const BasisTransform& basis,
                              Direction direction) {
    const ComplexMatrix& v = basis.matrix;
    if (rho.rows() != v.rows() || rho.cols() != v.cols()) {
        throw std::invalid_argument("transform_state: dimension mismatch");
    }
    // V is unitary, so V^-1 = V^dagger.
    if (direction == Direction::Forward) return v.adjoint() * rho * v;
    return v * rho * v.adjoint();
}

ComplexMatrix superoperator_of(const BasisTransform& basis, Direction direction) {
    const ComplexMatrix& v = basis.matrix;
    // vec(A X B) = kron(B^T, A) vec(X)
    if (direction == Direction::Forward) return kron(v.transpose(), v.adjoint());
    return kron(v.conj(), v);
}

BlochVector bloch_map(const ComplexMatrix& rho) {
    if (rho.rows() != 2 || rho.cols() != 2) {
        throw std::invalid_argument("bloch_map: state must be 2x2");
    }
    const cplx pm = rho(1, 0);
    return {2.0 * pm.real(), 2.0 * pm.imag(), (rho(0, 0) - rho(1, 1)).real()};
}

BlochVector drive_vector(const Model& model) {
    if (model.kind != ModelKind::TwoLevel) {
        throw std::invalid_argument("drive_vector: defined for the two-level model");
    }
    const auto basis = basis_for(model, BasisKind::Decoherence);
    const ComplexMatrix h = transform_operator(model.hamiltonian, basis);
    // H = h0 I + (1/2) Omega . sigma
    return {2.0 * h(0, 1).real(), -2.0 * h(0, 1).imag(), (h(0, 0) - h(1, 1)).real()};
}

BlochVector bloch_coherent_derivative(const BlochVector& s, const Model& model) {
    const BlochVector w = drive_vector(model);
    return {w.sy * s.sz - w.sz * s.sy, w.sz * s.sx - w.sx * s.sz, w.sx * s.sy - w.sy * s.sx};
}

} // namespace qts
