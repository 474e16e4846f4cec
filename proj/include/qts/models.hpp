// models.hpp: the near-degenerate two-level system and the V model,
// with bath-induced rates from an Ohmic spectral density (k_B = hbar = 1).

#pragma once

#include <string>
#include <vector>

#include "qts/numkit.hpp"

namespace qts {

enum class ModelKind { TwoLevel, VModel };

std::string to_string(ModelKind kind);

struct BathSpec {
    double coupling = 0.0;     // dimensionless a in J(w) = a w
    double temperature = 0.0;  // T
};

struct ModelParams {
    double delta = 0.0;
    double nu = 0.0; // V model only
    double temperature = 0.0;
    double coupling = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
};

/// A system Hamiltonian with its collapse operators, expressed in the energy
/// eigenbasis. The Hamiltonian is stored split into its delta-independent part
/// and the delta-proportional perturbation so that perturbative spectral
/// estimates can be formed.
struct Model {
    ModelKind kind = ModelKind::TwoLevel;
    std::string label;
    std::size_t dimension = 0;
    ComplexMatrix hamiltonian;
    ComplexMatrix hamiltonian_unperturbed;
    ComplexMatrix hamiltonian_perturbation;
    std::vector<ComplexMatrix> collapse_ops;
    std::vector<std::string> channel_names;
    ModelParams params;
    std::vector<std::string> warnings;
};

/// (e^{beta omega} - 1)^{-1}. Throws std::domain_error for omega == 0; rate
/// constructors take that limit analytically.
double bose_einstein(double omega, double beta);

/// H = (delta/2)(|1><1| - |0><0|), L = sqrt(gamma) (sigma_x + sigma_z)/sqrt(2),
/// gamma = a T.
Model build_two_level(double delta, const BathSpec& bath);

/// H = (nu - delta)|2><2| + nu|3><3| with ground |1> at index 0;
/// L_down = sqrt(gamma/2)|1>(<2| + <3|), L_up = sqrt(e^{-beta nu} gamma/2)(|2> + |3>)<1|,
/// gamma = a nu (n(nu) + 1).
Model build_v_model(double nu, double delta, const BathSpec& bath);

/// Gibbs state with order-delta splittings neglected.
ComplexMatrix thermal_state(const Model& model);

/// Lowest-energy eigenstate of the Hamiltonian as a density matrix.
ComplexMatrix ground_state(const Model& model);

/// Partition functions Z = 1 + 2 e^{-beta nu} and Z_I = 1 + e^{-beta nu}.
double partition_function(double beta_nu);
double partition_function_intermediate(double beta_nu);

} // namespace qts
