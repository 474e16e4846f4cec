#include "qts/analytic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qts::analytic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_time(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("analytic: time must be non-negative");
}

} // namespace

double two_level_tau1(double delta, double gamma) { return 4.0 * gamma / (delta * delta); }
double two_level_tau2(double gamma) { return 1.0 / (2.0 * gamma); }

double v_model_tau1(double delta, double gamma, double beta_nu) {
    return partition_function_intermediate(beta_nu) / partition_function(beta_nu) * gamma /
           (delta * delta);
}

double v_model_tau2(double gamma, double beta_nu) {
    return 1.0 / (partition_function_intermediate(beta_nu) * gamma);
}

TwoLevelEigen two_level_eigenbasis(double t, double delta, double gamma) {
    require_time(t);
    const double slow = std::exp(-t / two_level_tau1(delta, gamma));
    const double fast = std::exp(-t / two_level_tau2(gamma));
    return {0.5 - 0.25 * (slow + fast), 0.25 * (slow - fast)};
}

TwoLevelAlternate two_level_alternate(double t, double delta, double gamma) {
    require_time(t);
    const double a = 1.0 / (2.0 * std::sqrt(2.0));
    return {0.5 - a * std::exp(-t / two_level_tau1(delta, gamma)),
            -a * std::exp(-t / two_level_tau2(gamma))};
}

double sigma_z_autocorrelation(double t, double delta, double gamma) {
    require_time(t);
    return std::exp(-t / two_level_tau1(delta, gamma));
}

VModelEigen v_model_eigenbasis(double t, double nu, double delta, double gamma, double beta) {
    require_time(t);
    const double bn = beta * nu;
    const double boltz = std::exp(-bn);
    const double z = partition_function(bn);
    const double zi = partition_function_intermediate(bn);
    const double slow = std::exp(-t / v_model_tau1(delta, gamma, bn));
    const double fast = std::exp(-t / v_model_tau2(gamma, bn));
    // The coherence amplitude carries 1/Z_I; without it |rho_32| would exceed
    // sqrt(rho_22 rho_33) on the plateau.
    return {1.0 / z + boltz / zi * (slow / z + fast), boltz / (2.0 * zi) * (slow - fast)};
}

VModelPlusMinus v_model_pm(double t, double nu, double delta, double gamma, double beta) {
    require_time(t);
    const double bn = beta * nu;
    const double boltz = std::exp(-bn);
    const double z = partition_function(bn);
    const double zi = partition_function_intermediate(bn);
    const double slow = std::exp(-t / v_model_tau1(delta, gamma, bn));
    const double fast = std::exp(-t / v_model_tau2(gamma, bn));
    return {boltz / z + boltz / zi * (boltz * slow / z - fast), boltz / z * (1.0 - slow)};
}

std::pair<double, double> v_model_intermediate_populations(double beta_nu) {
    const double zi = partition_function_intermediate(beta_nu);
    return {1.0 / zi, std::exp(-beta_nu) / zi};
}

AnalyticSolution describe(const Model& model, BasisKind basis) {
    AnalyticSolution s;
    s.model_label = model.label;
    s.basis_label = to_string(basis);
    s.validity_note = "leading order in delta; ground-state initial condition";
    const auto& p = model.params;
    if (model.kind == ModelKind::TwoLevel) {
        s.tau1 = two_level_tau1(p.delta, p.gamma);
        s.tau2 = two_level_tau2(p.gamma);
    } else {
        s.tau1 = v_model_tau1(p.delta, p.gamma, p.beta * p.nu);
        s.tau2 = v_model_tau2(p.gamma, p.beta * p.nu);
    }
    return s;
}

std::optional<std::vector<ComplexMatrix>> closed_form_states(const Model& model, BasisKind basis,
                                                             const std::vector<double>& grid) {
    const auto& p = model.params;
    std::vector<ComplexMatrix> out;
    out.reserve(grid.size());

    if (model.kind == ModelKind::TwoLevel && basis == BasisKind::Eigen) {
        for (double t : grid) {
            const auto s = two_level_eigenbasis(t, p.delta, p.gamma);
            ComplexMatrix rho(2, 2);
            rho(1, 1) = s.rho11;
            rho(0, 0) = 1.0 - s.rho11;
            rho(1, 0) = cplx(s.re_coh, kNaN);
            rho(0, 1) = cplx(s.re_coh, kNaN);
            out.push_back(rho);
        }
        return out;
    }
    if (model.kind == ModelKind::TwoLevel && basis == BasisKind::Decoherence) {
        for (double t : grid) {
            const auto s = two_level_alternate(t, p.delta, p.gamma);
            ComplexMatrix rho(2, 2);
            rho(0, 0) = s.rho_mm;
            rho(1, 1) = 1.0 - s.rho_mm;
            rho(1, 0) = cplx(s.re_coh_pm, kNaN);
            rho(0, 1) = cplx(s.re_coh_pm, kNaN);
            out.push_back(rho);
        }
        return out;
    }
    if (model.kind == ModelKind::VModel && basis == BasisKind::Eigen) {
        for (double t : grid) {
            const auto s = v_model_eigenbasis(t, p.nu, p.delta, p.gamma, p.beta);
            ComplexMatrix rho(3, 3);
            rho(0, 0) = s.rho11;
            rho(1, 1) = rho(2, 2) = 0.5 * (1.0 - s.rho11);
            // Ground-excited coherences never develop from a ground-state start.
            rho(1, 0) = rho(0, 1) = rho(2, 0) = rho(0, 2) = 0.0;
            rho(2, 1) = rho(1, 2) = cplx(s.re_coh32, kNaN);
            out.push_back(rho);
        }
        return out;
    }
    if (model.kind == ModelKind::VModel && basis == BasisKind::PlusMinus) {
        for (double t : grid) {
            const auto s = v_model_pm(t, p.nu, p.delta, p.gamma, p.beta);
            ComplexMatrix rho(3, 3);
            rho(0, 0) = 1.0 - s.rho_pp - s.rho_mm;
            rho(1, 1) = s.rho_pp;
            rho(2, 2) = s.rho_mm;
            rho(1, 0) = rho(0, 1) = rho(2, 0) = rho(0, 2) = 0.0;
            // Re rho_{+-} decouples and stays zero; Im rho_{+-} is undetermined.
            rho(2, 1) = rho(1, 2) = cplx(0.0, kNaN);
            out.push_back(rho);
        }
        return out;
    }
    return std::nullopt;
}

} // namespace qts::analytic
