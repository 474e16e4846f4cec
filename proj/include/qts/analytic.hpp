// analytic.hpp: leading-order closed-form relaxation curves for a
// ground-state start, used as oracles for the numerical propagators.
//
// Imaginary coherence parts are absent on purpose: at leading order in delta the
// perturbative solution does not determine them.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qts/bases.hpp"
#include "qts/models.hpp"
#include "qts/numkit.hpp"

namespace qts::analytic {

struct TwoLevelEigen {
    double rho11;
    double re_coh; // Re <1|rho|0>
};

struct TwoLevelAlternate {
    double rho_mm;    // population of |psi_->
    double re_coh_pm; // Re <psi_+|rho|psi_->
};

struct VModelEigen {
    double rho11;
    double re_coh32; // Re <3|rho|2>
};

struct VModelPlusMinus {
    double rho_pp;
    double rho_mm;
};

/// tau1 = 4 gamma / delta^2, tau2 = 1 / (2 gamma)
double two_level_tau1(double delta, double gamma);
double two_level_tau2(double gamma);

/// tau1 = (Z_I / Z) gamma / delta^2, tau2 = 1 / (Z_I gamma)
double v_model_tau1(double delta, double gamma, double beta_nu);
double v_model_tau2(double gamma, double beta_nu);

TwoLevelEigen two_level_eigenbasis(double t, double delta, double gamma);
TwoLevelAlternate two_level_alternate(double t, double delta, double gamma);

/// <sigma_z(t) sigma_z(0)> in the decoherence basis.
double sigma_z_autocorrelation(double t, double delta, double gamma);

VModelEigen v_model_eigenbasis(double t, double nu, double delta, double gamma, double beta);
VModelPlusMinus v_model_pm(double t, double nu, double delta, double gamma, double beta);

/// Metastable populations (rho_11, rho_++) ~ (1/Z_I, e^{-beta nu}/Z_I) for tau2 << t << tau1.
std::pair<double, double> v_model_intermediate_populations(double beta_nu);

struct AnalyticSolution {
    std::string model_label;
    std::string basis_label;
    double tau1 = 0.0;
    double tau2 = 0.0;
    std::string validity_note;
};

/// Full density matrices implied by the closed forms for a ground-state start,
/// one per grid time. Entries that the closed forms do not determine are NaN.
/// Returns nullopt when no closed form exists for the model/basis pair.
std::optional<std::vector<ComplexMatrix>> closed_form_states(const Model& model, BasisKind basis,
                                                             const std::vector<double>& grid);

AnalyticSolution describe(const Model& model, BasisKind basis);

} // namespace qts::analytic
