// master.hpp: Lindblad generator assembly, propagation, steady states and
// timescale extraction from the Liouvillian spectrum.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qts/bases.hpp"
#include "qts/models.hpp"
#include "qts/numkit.hpp"

namespace qts {

/// Generator acting on column-stacked density matrices (dim^2 x dim^2).
struct Liouvillian {
    ComplexMatrix matrix;
    Model model;
    BasisTransform basis;
    std::string basis_label = "eigen";

    std::size_t dimension() const { return model.dimension; }
};

/// L rho L^dagger - (1/2){L^dagger L, rho}
ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho);

/// -i[H, .] + sum_k D[L_k] as a superoperator.
ComplexMatrix lindblad_superoperator(const ComplexMatrix& hamiltonian,
                                     const std::vector<ComplexMatrix>& collapse_ops);

/// Generator of `model` expressed in `basis` (identity when absent).
Liouvillian assemble(const Model& model, const std::optional<BasisTransform>& basis = std::nullopt);

/// Model operators re-expressed in the given basis.
Model model_in_basis(const Model& model, const BasisTransform& basis);

/// Propagator exp(L t) built once from the generator spectrum, with a fixed-step
/// RK4 fallback for a defective spectrum.
class Propagator {
public:
    explicit Propagator(const Liouvillian& liouvillian);

    /// rho(t) for each grid time; grid must be ascending and non-negative.
    std::vector<ComplexMatrix> evolve(const ComplexMatrix& rho0, const std::vector<double>& grid) const;

    bool uses_fallback() const { return !spectral_; }
    const SpectralDecomposition& spectrum() const { return spectrum_; }

private:
    ComplexMatrix generator_;
    std::size_t dim_ = 0;
    SpectralDecomposition spectrum_;
    bool spectral_ = true;
};

/// Throws std::invalid_argument unless rho is Hermitian, trace one and PSD
/// (each within `tol`).
void validate_state(const ComplexMatrix& rho, double tol = 1e-10);

std::vector<ComplexMatrix> evolve(const Liouvillian& liouvillian, const ComplexMatrix& rho0,
                                  const std::vector<double>& grid);

/// Classic RK4 on the vectorized generator with step <= 0.05 / ||L||_1.
std::vector<ComplexMatrix> evolve_rk4(const ComplexMatrix& generator, const ComplexMatrix& rho0,
                                      const std::vector<double>& grid);

/// Unique null right-eigenvector, trace-normalized and Hermitized.
ComplexMatrix steady_state(const Liouvillian& liouvillian);

struct TimescaleReport {
    ComplexVector eigenvalues; // ascending |Re|
    double tau1 = 0.0;         // +inf when the slow eigenvalue vanishes
    double tau2 = 0.0;
    std::optional<std::pair<double, double>> metastable_window;
    std::string note;
};

/// tau1 from the slowest nonzero eigenvalue; tau2 from the fastest mode that
/// the relaxation of `initial` (default: Hamiltonian ground state) excites.
TimescaleReport timescales(const Liouvillian& liouvillian,
                           const std::optional<ComplexMatrix>& initial = std::nullopt);

std::string to_json(const TimescaleReport& report);

struct PerturbativeEigenvalue {
    cplx first_order;
    cplx second_order;
    cplx value; // first order unless it vanishes, then second order
};

/// Estimate of the eigenvalue that vanishes as delta -> 0, by perturbing the
/// delta-free generator with the delta-proportional Hamiltonian part.
PerturbativeEigenvalue perturbative_slow_eigenvalue(const Model& model);

} // namespace qts
