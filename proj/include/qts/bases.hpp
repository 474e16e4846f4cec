// bases.hpp: basis changes: the decoherence basis of a single Lindblad
// operator, the V-model {|1>,|+>,|->} basis, and the Bloch-sphere picture.

#pragma once

#include <string>

#include "qts/models.hpp"
#include "qts/numkit.hpp"

namespace qts {

enum class BasisKind { Eigen, Decoherence, PlusMinus };

std::string to_string(BasisKind kind);
BasisKind basis_from_string(const std::string& name);

/// Unitary V whose columns are the new basis states in old coordinates.
struct BasisTransform {
    ComplexMatrix matrix;
    std::string from_label = "eigen";
    std::string to_label = "eigen";
};

enum class Direction { Forward, Backward };

struct DiagonalizedLindblad {
    BasisTransform transform;
    ComplexMatrix diagonal; // V^-1 L V
};

/// Decoherence basis of a normal operator. Columns are phase-fixed so the
/// largest-magnitude entry is real positive; eigenvalues ascend by real part.
/// Throws std::invalid_argument for a non-normal operator.
DiagonalizedLindblad diagonalize_lindblad(const ComplexMatrix& l);

/// Fails unless all operators are normal and commute, i.e. share a decoherence
/// basis; the V-model pair {L_down, L_up} does not.
DiagonalizedLindblad diagonalize_lindblad_set(const std::vector<ComplexMatrix>& ops);

/// {|1>,|2>,|3>} -> {|1>,|+>,|->} with |+-> = (|2> +- |3>)/sqrt(2).
BasisTransform v_model_pm_basis();

/// Basis named by `kind` for this model; Eigen gives the identity.
BasisTransform basis_for(const Model& model, BasisKind kind);

/// Forward: V^-1 rho V. Backward: V rho V^-1.
ComplexMatrix transform_state(const ComplexMatrix& rho, const BasisTransform& basis,
                              Direction direction = Direction::Forward);

/// Same conjugation applied to operators (Hamiltonian, collapse operators).
inline ComplexMatrix transform_operator(const ComplexMatrix& op, const BasisTransform& basis,
                                        Direction direction = Direction::Forward) {
    return transform_state(op, basis, direction);
}

/// Superoperator U with vec(V^-1 X V) = U vec(X).
ComplexMatrix superoperator_of(const BasisTransform& basis, Direction direction = Direction::Forward);

struct BlochVector {
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;
};

/// Bloch vector of a 2x2 state in the decoherence basis ordered {|psi_->, |psi_+>}:
/// sx = 2 Re rho_{+-}, sy = 2 Im rho_{+-}, sz = rho_{--} - rho_{++}, rho_{+-} = rho(1, 0).
BlochVector bloch_map(const ComplexMatrix& rho);

/// Drive vector Omega = (delta/sqrt(2), 0, delta/sqrt(2)) of the two-level model
/// in the decoherence basis.
BlochVector drive_vector(const Model& model);

/// Coherent part of the Bloch motion, Omega x s (right-handed cross product).
BlochVector bloch_coherent_derivative(const BlochVector& s, const Model& model);

} // namespace qts
