#include "qts/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qts {

ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho) {
    if (l.rows() != rho.rows() || l.cols() != rho.cols() || !l.is_square()) {
        throw std::invalid_argument("dissipator: dimension mismatch");
    }
    const ComplexMatrix ld = l.adjoint();
    const ComplexMatrix ldl = ld * l;
    ComplexMatrix out = l * rho * ld;
    ComplexMatrix anti = ldl * rho + rho * ldl;
    anti *= 0.5;
    out -= anti;
    return out;
}

ComplexMatrix lindblad_superoperator(const ComplexMatrix& hamiltonian,
                                     const std::vector<ComplexMatrix>& collapse_ops) {
    const std::size_t d = hamiltonian.rows();
    const ComplexMatrix id = ComplexMatrix::identity(d);
    ComplexMatrix gen = kron(id, hamiltonian) - kron(hamiltonian.transpose(), id);
    gen *= cplx(0.0, -1.0);
    for (const auto& l : collapse_ops) {
        const ComplexMatrix ldl = l.adjoint() * l;
        gen += kron(l.conj(), l);
        ComplexMatrix anti = kron(id, ldl) + kron(ldl.transpose(), id);
        anti *= 0.5;
        gen -= anti;
    }
    return gen;
}

Model model_in_basis(const Model& model, const BasisTransform& basis) {
    Model out = model;
    out.hamiltonian = transform_operator(model.hamiltonian, basis);
    out.hamiltonian_unperturbed = transform_operator(model.hamiltonian_unperturbed, basis);
    out.hamiltonian_perturbation = transform_operator(model.hamiltonian_perturbation, basis);
    for (auto& l : out.collapse_ops) l = transform_operator(l, basis);
    return out;
}

Liouvillian assemble(const Model& model, const std::optional<BasisTransform>& basis) {
    Liouvillian out;
    out.model = model;
    if (basis) {
        out.basis = *basis;
        out.basis_label = basis->to_label;
    } else {
        out.basis.matrix = ComplexMatrix::identity(model.dimension);
    }
    const Model expressed = basis ? model_in_basis(model, *basis) : model;
    out.matrix = lindblad_superoperator(expressed.hamiltonian, expressed.collapse_ops);
    return out;
}

void validate_state(const ComplexMatrix& rho, double tol) {
    if (!rho.is_square() || rho.rows() == 0) throw std::invalid_argument("state must be square");
    if (hermiticity_defect(rho) > tol) throw std::invalid_argument("state is not Hermitian");
    if (std::abs(rho.trace() - 1.0) > tol) throw std::invalid_argument("state trace is not 1");
    if (hermitian_eigenvalues(rho).front() < -tol) {
        throw std::invalid_argument("state is not positive semidefinite");
    }
}

namespace {

ComplexMatrix hermitized(ComplexMatrix m) {
    ComplexMatrix h = m + m.adjoint();
    h *= 0.5;
    return h;
}

void validate_grid(const std::vector<double>& grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
            throw std::invalid_argument("time grid must be finite and non-negative");
        }
        if (i > 0 && grid[i] < grid[i - 1]) throw std::invalid_argument("time grid must ascend");
    }
}

} // namespace

Propagator::Propagator(const Liouvillian& liouvillian)
    : generator_(liouvillian.matrix), dim_(liouvillian.dimension()) {
    try {
        spectrum_ = eig_general(generator_);
        spectral_ = !spectrum_.defective();
    } catch (const SolverFailure&) {
        spectral_ = false;
    }
}

std::vector<ComplexMatrix> Propagator::evolve(const ComplexMatrix& rho0,
                                              const std::vector<double>& grid) const {
    if (rho0.rows() != dim_) throw std::invalid_argument("evolve: state dimension mismatch");
    validate_grid(grid);
    if (!spectral_) return evolve_rk4(generator_, rho0, grid);

    const ComplexVector v0 = vectorize(rho0);
    const ComplexVector coeff = spectrum_.left * std::span<const cplx>(v0);
    const std::size_t n = coeff.size();
    std::vector<ComplexMatrix> out;
    out.reserve(grid.size());
    ComplexVector v(n);
    for (double t : grid) {
        if (t == 0.0) {
            out.push_back(rho0);
            continue;
        }
        std::fill(v.begin(), v.end(), cplx{});
        for (std::size_t k = 0; k < n; ++k) {
            const cplx ck = coeff[k] * std::exp(spectrum_.eigenvalues[k] * t);
            if (ck == cplx{}) continue;
            for (std::size_t i = 0; i < n; ++i) v[i] += spectrum_.right(i, k) * ck;
        }
        out.push_back(hermitized(unvectorize(v, dim_)));
    }
    return out;
}

std::vector<ComplexMatrix> evolve_rk4(const ComplexMatrix& generator, const ComplexMatrix& rho0,
                                      const std::vector<double>& grid) {
    validate_grid(grid);
    const std::size_t dim = rho0.rows();
    const double bound = std::max(norm1(generator), std::numeric_limits<double>::min());
    const double max_step = 0.05 / bound;

    ComplexVector v = vectorize(rho0);
    const std::size_t n = v.size();
    ComplexVector tmp(n);
    auto axpy = [n](ComplexVector& out, const ComplexVector& x, cplx a, const ComplexVector& y) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
    };

    std::vector<ComplexMatrix> out;
    out.reserve(grid.size());
    double t = 0.0;
    for (double target : grid) {
        const double span = target - t;
        if (span > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(span / max_step));
            const double h = span / static_cast<double>(steps);
            for (std::size_t s = 0; s < steps; ++s) {
                const ComplexVector k1 = generator * std::span<const cplx>(v);
                axpy(tmp, v, 0.5 * h, k1);
                const ComplexVector k2 = generator * std::span<const cplx>(tmp);
                axpy(tmp, v, 0.5 * h, k2);
                const ComplexVector k3 = generator * std::span<const cplx>(tmp);
                axpy(tmp, v, h, k3);
                const ComplexVector k4 = generator * std::span<const cplx>(tmp);
                for (std::size_t i = 0; i < n; ++i)
                    v[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            for (const auto& z : v)
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                    throw SolverFailure("evolve_rk4: propagation diverged", std::abs(z));
            t = target;
        }
        out.push_back(target == 0.0 ? rho0 : hermitized(unvectorize(v, dim)));
    }
    return out;
}

std::vector<ComplexMatrix> evolve(const Liouvillian& liouvillian, const ComplexMatrix& rho0,
                                  const std::vector<double>& grid) {
    validate_state(rho0);
    return Propagator(liouvillian).evolve(rho0, grid);
}

namespace {

std::vector<std::size_t> null_indices(const SpectralDecomposition& d, double tol) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < d.eigenvalues.size(); ++k)
        if (std::abs(d.eigenvalues[k]) <= tol) idx.push_back(k);
    return idx;
}

} // namespace

ComplexMatrix steady_state(const Liouvillian& liouvillian) {
    const auto d = eig_general(liouvillian.matrix);
    const double scale = frobenius_norm(liouvillian.matrix);
    const auto zeros = null_indices(d, 1e-8 * scale);
    if (zeros.size() != 1) {
        std::ostringstream os;
        os << "steady_state: null space has dimension " << zeros.size() << " (expected 1)";
        throw std::runtime_error(os.str());
    }
    ComplexVector v(d.eigenvalues.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.right(i, zeros.front());
    ComplexMatrix rho = unvectorize(v, liouvillian.dimension());
    rho *= 1.0 / rho.trace();
    return hermitized(rho);
}

TimescaleReport timescales(const Liouvillian& liouvillian, const std::optional<ComplexMatrix>& initial) {
    const auto d = eig_general(liouvillian.matrix);
    const double scale = frobenius_norm(liouvillian.matrix);
    const std::size_t n = d.eigenvalues.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = std::abs(d.eigenvalues[a].real()), rb = std::abs(d.eigenvalues[b].real());
        if (ra != rb) return ra < rb;
        return d.eigenvalues[a].imag() < d.eigenvalues[b].imag();
    });

    TimescaleReport report;
    for (auto k : order) report.eigenvalues.push_back(d.eigenvalues[k]);
    if (n < 2) {
        report.tau1 = report.tau2 = std::numeric_limits<double>::infinity();
        report.note = "no relaxing modes";
        return report;
    }

    // order[0] is the stationary mode.
    const double slow = std::abs(d.eigenvalues[order[1]].real());
    report.tau1 = (slow <= 1e-12 * scale) ? std::numeric_limits<double>::infinity() : 1.0 / slow;
    if (std::isinf(report.tau1)) report.note = "slowest nonzero eigenvalue vanishes: tau1 diverges";

    ComplexMatrix rho0;
    if (initial) {
        rho0 = *initial;
    } else {
        rho0 = transform_state(ground_state(liouvillian.model), liouvillian.basis);
    }
    const ComplexVector v0 = vectorize(rho0);
    const ComplexVector coeff = d.left * std::span<const cplx>(v0);
    const double ref = norm2(v0);
    double fastest = 0.0;
    for (std::size_t pos = 1; pos < n; ++pos) {
        const std::size_t k = order[pos];
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i) col += std::norm(d.right(i, k));
        if (std::abs(coeff[k]) * std::sqrt(col) > 1e-8 * ref) {
            fastest = std::max(fastest, std::abs(d.eigenvalues[k].real()));
        }
    }
    report.tau2 = fastest > 0.0 ? 1.0 / fastest : std::numeric_limits<double>::infinity();

    if (std::isfinite(report.tau1) && std::isfinite(report.tau2) && report.tau1 / report.tau2 >= 10.0) {
        report.metastable_window = std::make_pair(5.0 * report.tau2, report.tau1 / 5.0);
    } else if (report.note.empty()) {
        report.note = "no spectral gap of at least a factor 10";
    }
    return report;
}

std::string to_json(const TimescaleReport& report) {
    nlohmann::json j;
    auto num = [](double x) -> nlohmann::json {
        return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
    };
    j["eigenvalues"] = nlohmann::json::array();
    for (const auto& z : report.eigenvalues) j["eigenvalues"].push_back({z.real(), z.imag()});
    j["tau1"] = num(report.tau1);
    j["tau2"] = num(report.tau2);
    if (report.metastable_window) {
        j["window"] = {report.metastable_window->first, report.metastable_window->second};
    } else {
        j["window"] = nullptr;
    }
    if (!report.note.empty()) j["note"] = report.note;
    return j.dump(2);
}

PerturbativeEigenvalue perturbative_slow_eigenvalue(const Model& model) {
    const ComplexMatrix l0 = lindblad_superoperator(model.hamiltonian_unperturbed, model.collapse_ops);
    const ComplexMatrix v = lindblad_superoperator(model.hamiltonian_perturbation, {});
    const auto d = eig_general(l0);
    if (d.defective()) {
        throw std::runtime_error("perturbative_slow_eigenvalue: unperturbed generator is defective");
    }
    const auto zeros = null_indices(d, 1e-9 * frobenius_norm(l0));
    if (zeros.size() != 2) {
        std::ostringstream os;
        os << "perturbative_slow_eigenvalue: unperturbed null space has dimension " << zeros.size()
           << "; expected the stationary mode plus exactly one vanishing mode";
        throw std::runtime_error(os.str());
    }

    const std::size_t n = d.eigenvalues.size();
    // V r_k for every k, then project with the left vectors.
    const ComplexMatrix vr = v * d.right;
    const ComplexMatrix coupling = d.left * vr; // <l_a|V|r_b>

    ComplexMatrix first(2, 2), second(2, 2);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            first(a, b) = coupling(zeros[a], zeros[b]);
            cplx s{};
            for (std::size_t k = 0; k < n; ++k) {
                if (k == zeros[0] || k == zeros[1]) continue;
                s += coupling(zeros[a], k) * coupling(k, zeros[b]) / (-d.eigenvalues[k]);
            }
            second(a, b) = s;
        }

    // The trace functional lies in the left null space and annihilates V, so each
    // effective matrix has a zero eigenvalue; the other one is the correction.
    auto nontrivial = [](const ComplexMatrix& w) {
        const auto ev = eig_general(w).eigenvalues;
        return std::abs(ev[0]) >= std::abs(ev[1]) ? ev[0] : ev[1];
    };

    PerturbativeEigenvalue out;
    out.first_order = nontrivial(first);
    out.second_order = nontrivial(first + second);
    out.value = (std::abs(out.first_order) <= 1e-12 * model.params.gamma) ? out.second_order
                                                                          : out.first_order;
    return out;
}

} // namespace qts
