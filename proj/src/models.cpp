#include "qts/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qts {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::TwoLevel: return "two_level";
    case ModelKind::VModel: return "v_model";
    }
    return "unknown";
}

double bose_einstein(double omega, double beta) {
    if (omega == 0.0) {
        throw std::domain_error(
            "bose_einstein: omega == 0 diverges; use the analytic zero-frequency rate limit");
    }
    return 1.0 / std::expm1(beta * omega);
}

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << name << " must be positive and finite (got " << value << ")";
        throw std::invalid_argument(os.str());
    }
}

} // namespace

double partition_function(double beta_nu) { return 1.0 + 2.0 * std::exp(-beta_nu); }
double partition_function_intermediate(double beta_nu) { return 1.0 + std::exp(-beta_nu); }

Model build_two_level(double delta, const BathSpec& bath) {
    require_positive(delta, "delta");
    require_positive(bath.temperature, "temperature");
    require_positive(bath.coupling, "coupling");

    Model m;
    m.kind = ModelKind::TwoLevel;
    m.label = "two_level";
    m.dimension = 2;
    m.params.delta = delta;
    m.params.temperature = bath.temperature;
    m.params.coupling = bath.coupling;
    m.params.beta = 1.0 / bath.temperature;
    // lim_{w->0} n(w) a w = a T
    m.params.gamma = bath.coupling * bath.temperature;

    m.hamiltonian = ComplexMatrix(2, 2, {-delta / 2.0, 0.0, 0.0, delta / 2.0});
    m.hamiltonian_unperturbed = ComplexMatrix(2, 2);
    m.hamiltonian_perturbation = m.hamiltonian;

    const double s = std::sqrt(m.params.gamma / 2.0);
    m.collapse_ops.push_back(ComplexMatrix(2, 2, {s, s, s, -s}));
    m.channel_names.push_back("L");

    if (delta / bath.temperature > 0.1) {
        std::ostringstream os;
        os << "delta/T = " << delta / bath.temperature
           << " > 0.1: the near-degenerate rate approximation is degraded";
        m.warnings.push_back(os.str());
    }
    return m;
}

Model build_v_model(double nu, double delta, const BathSpec& bath) {
    require_positive(nu, "nu");
    require_positive(delta, "delta");
    require_positive(bath.temperature, "temperature");
    require_positive(bath.coupling, "coupling");
    if (delta >= nu) {
        throw std::invalid_argument("build_v_model: delta must be smaller than nu");
    }

    Model m;
    m.kind = ModelKind::VModel;
    m.label = "v_model";
    m.dimension = 3;
    m.params.delta = delta;
    m.params.nu = nu;
    m.params.temperature = bath.temperature;
    m.params.coupling = bath.coupling;
    m.params.beta = 1.0 / bath.temperature;
    m.params.gamma = bath.coupling * nu * (bose_einstein(nu, m.params.beta) + 1.0);

    m.hamiltonian = ComplexMatrix(3, 3);
    m.hamiltonian(1, 1) = nu - delta;
    m.hamiltonian(2, 2) = nu;
    m.hamiltonian_unperturbed = ComplexMatrix(3, 3);
    m.hamiltonian_unperturbed(1, 1) = nu;
    m.hamiltonian_unperturbed(2, 2) = nu;
    m.hamiltonian_perturbation = ComplexMatrix(3, 3);
    m.hamiltonian_perturbation(1, 1) = -delta;

    const double down = std::sqrt(m.params.gamma / 2.0);
    const double up = std::sqrt(std::exp(-m.params.beta * nu) * m.params.gamma / 2.0);
    ComplexMatrix l_down(3, 3);
    l_down(0, 1) = down;
    l_down(0, 2) = down;
    ComplexMatrix l_up(3, 3);
    l_up(1, 0) = up;
    l_up(2, 0) = up;
    m.collapse_ops = {l_down, l_up};
    m.channel_names = {"L_down", "L_up"};
    return m;
}

ComplexMatrix thermal_state(const Model& model) {
    if (model.kind == ModelKind::TwoLevel) {
        ComplexMatrix rho = ComplexMatrix::identity(2);
        rho *= 0.5;
        return rho;
    }
    const double bn = model.params.beta * model.params.nu;
    const double z = partition_function(bn);
    ComplexMatrix rho(3, 3);
    rho(0, 0) = 1.0 / z;
    rho(1, 1) = std::exp(-bn) / z;
    rho(2, 2) = std::exp(-bn) / z;
    return rho;
}

ComplexMatrix ground_state(const Model& model) {
    // Both Hamiltonians are diagonal in the stored basis.
    std::size_t best = 0;
    for (std::size_t i = 1; i < model.dimension; ++i)
        if (model.hamiltonian(i, i).real() < model.hamiltonian(best, best).real()) best = i;
    ComplexMatrix rho(model.dimension, model.dimension);
    rho(best, best) = 1.0;
    return rho;
}

} // namespace qts
