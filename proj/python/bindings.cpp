// Python bindings: models, master-equation propagation, trajectories and the
// closed forms, with NumPy arrays for matrices.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "qts/analytic.hpp"
#include "qts/bases.hpp"
#include "qts/master.hpp"
#include "qts/models.hpp"
#include "qts/scenario.hpp"
#include "qts/trajectories.hpp"

namespace py = pybind11;
using namespace qts;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

ComplexMatrix to_matrix(const CArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto r = a.unchecked<2>();
    ComplexMatrix m(static_cast<std::size_t>(r.shape(0)), static_cast<std::size_t>(r.shape(1)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        for (py::ssize_t j = 0; j < r.shape(1); ++j) m(i, j) = r(i, j);
    return m;
}

CArray to_array(const ComplexMatrix& m) {
    CArray a({m.rows(), m.cols()});
    auto w = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
    return a;
}

CArray to_array(const std::vector<ComplexMatrix>& ms, std::size_t dim) {
    CArray a({ms.size(), dim, dim});
    auto w = a.mutable_unchecked<3>();
    for (std::size_t k = 0; k < ms.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) w(k, i, j) = ms[k](i, j);
    return a;
}

BasisTransform basis_named(const Model& model, const std::string& name) {
    return basis_for(model, basis_from_string(name));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lindblad dynamics, quantum jump trajectories and relaxation timescales";

    py::class_<Model>(m, "Model")
        .def_property_readonly("label", [](const Model& x) { return x.label; })
        .def_property_readonly("dimension", [](const Model& x) { return x.dimension; })
        .def_property_readonly("gamma", [](const Model& x) { return x.params.gamma; })
        .def_property_readonly("beta", [](const Model& x) { return x.params.beta; })
        .def_property_readonly("hamiltonian", [](const Model& x) { return to_array(x.hamiltonian); })
        .def_property_readonly("collapse_ops",
                               [](const Model& x) {
                                   py::list out;
                                   for (const auto& l : x.collapse_ops) out.append(to_array(l));
                                   return out;
                               })
        .def_property_readonly("warnings", [](const Model& x) { return x.warnings; });

    m.def("two_level", [](double delta, double coupling, double temperature) {
        return build_two_level(delta, {coupling, temperature});
    }, py::arg("delta"), py::arg("coupling"), py::arg("temperature"));
    m.def("v_model", [](double nu, double delta, double coupling, double temperature) {
        return build_v_model(nu, delta, {coupling, temperature});
    }, py::arg("nu"), py::arg("delta"), py::arg("coupling"), py::arg("temperature"));

    m.def("ground_state", [](const Model& x) { return to_array(ground_state(x)); });
    m.def("thermal_state", [](const Model& x) { return to_array(thermal_state(x)); });
    m.def("basis_matrix", [](const Model& x, const std::string& basis) {
        return to_array(basis_named(x, basis).matrix);
    }, py::arg("model"), py::arg("basis"));
    m.def("to_basis", [](const Model& x, const CArray& rho, const std::string& basis) {
        return to_array(transform_state(to_matrix(rho), basis_named(x, basis)));
    }, py::arg("model"), py::arg("rho"), py::arg("basis"));

    m.def("liouvillian", [](const Model& x, const std::string& basis) {
        return to_array(assemble(x, basis_named(x, basis)).matrix);
    }, py::arg("model"), py::arg("basis") = "eigen");

    m.def("evolve", [](const Model& x, const CArray& rho0, const std::vector<double>& grid, const std::string& basis) {
        const auto b = basis_named(x, basis);
        return to_array(evolve(assemble(x, b), to_matrix(rho0), grid), x.dimension);
    }, py::arg("model"), py::arg("rho0"), py::arg("grid"), py::arg("basis") = "eigen",
       "rho(t) for each grid time; rho0 is expressed in `basis`.");

    m.def("steady_state", [](const Model& x, const std::string& basis) {
        return to_array(steady_state(assemble(x, basis_named(x, basis))));
    }, py::arg("model"), py::arg("basis") = "eigen");

    m.def("timescales", [](const Model& x, const std::string& basis) {
        const auto r = timescales(assemble(x, basis_named(x, basis)));
        py::dict d;
        d["eigenvalues"] = std::vector<cplx>(r.eigenvalues.begin(), r.eigenvalues.end());
        d["tau1"] = r.tau1;
        d["tau2"] = r.tau2;
        d["window"] = r.metastable_window ? py::cast(*r.metastable_window) : py::none();
        d["note"] = r.note;
        return d;
    }, py::arg("model"), py::arg("basis") = "eigen");

    m.def("perturbative_slow_eigenvalue", [](const Model& x) { return perturbative_slow_eigenvalue(x).value; });

    m.def("sample_trajectory", [](const Model& x, const CArray& rho0, const std::vector<double>& grid,
                                  std::uint64_t seed, const std::string& basis) {
        const auto rec = sample_trajectory(x, basis_named(x, basis), to_matrix(rho0), grid, seed);
        py::list jumps;
        for (const auto& j : rec.jumps) jumps.append(py::make_tuple(j.time, j.channel));
        py::dict d;
        d["states"] = to_array(rec.states, x.dimension);
        d["jumps"] = jumps;
        d["seed"] = rec.seed;
        d["generator"] = rec.generator;
        return d;
    }, py::arg("model"), py::arg("rho0"), py::arg("grid"), py::arg("seed"), py::arg("basis") = "eigen");

    m.def("ensemble_average", [](const Model& x, const CArray& rho0, const std::vector<double>& grid,
                                 std::size_t count, std::uint64_t base_seed, const std::string& basis,
                                 std::size_t workers) {
        EnsembleSummary s;
        {
            py::gil_scoped_release release;
            s = ensemble_average(x, basis_named(x, basis), to_matrix(rho0), grid, count, base_seed, workers);
        }
        py::dict d;
        d["mean"] = to_array(s.mean_states, x.dimension);
        d["names"] = s.names;
        d["std_error"] = s.std_error;
        d["jump_counts"] = s.jump_counts;
        return d;
    }, py::arg("model"), py::arg("rho0"), py::arg("grid"), py::arg("count"), py::arg("base_seed") = 0,
       py::arg("basis") = "eigen", py::arg("workers") = 1);

    auto an = m.def_submodule("analytic", "Leading-order closed forms for a ground-state start");
    an.def("two_level_tau1", &analytic::two_level_tau1, py::arg("delta"), py::arg("gamma"));
    an.def("two_level_tau2", &analytic::two_level_tau2, py::arg("gamma"));
    an.def("v_model_tau1", &analytic::v_model_tau1, py::arg("delta"), py::arg("gamma"), py::arg("beta_nu"));
    an.def("v_model_tau2", &analytic::v_model_tau2, py::arg("gamma"), py::arg("beta_nu"));
    an.def("two_level_eigenbasis", [](double t, double delta, double gamma) {
        const auto s = analytic::two_level_eigenbasis(t, delta, gamma);
        return py::make_tuple(s.rho11, s.re_coh);
    }, py::arg("t"), py::arg("delta"), py::arg("gamma"));
    an.def("two_level_alternate", [](double t, double delta, double gamma) {
        const auto s = analytic::two_level_alternate(t, delta, gamma);
        return py::make_tuple(s.rho_mm, s.re_coh_pm);
    }, py::arg("t"), py::arg("delta"), py::arg("gamma"));
    an.def("sigma_z_autocorrelation", &analytic::sigma_z_autocorrelation, py::arg("t"), py::arg("delta"),
           py::arg("gamma"));
    an.def("v_model_eigenbasis", [](double t, double nu, double delta, double gamma, double beta) {
        const auto s = analytic::v_model_eigenbasis(t, nu, delta, gamma, beta);
        return py::make_tuple(s.rho11, s.re_coh32);
    }, py::arg("t"), py::arg("nu"), py::arg("delta"), py::arg("gamma"), py::arg("beta"));
    an.def("v_model_pm", [](double t, double nu, double delta, double gamma, double beta) {
        const auto s = analytic::v_model_pm(t, nu, delta, gamma, beta);
        return py::make_tuple(s.rho_pp, s.rho_mm);
    }, py::arg("t"), py::arg("nu"), py::arg("delta"), py::arg("gamma"), py::arg("beta"));

    m.def("preset_names", &cli::preset_names);
    m.def("preset_text", &cli::preset_text, py::arg("name"));
    m.def("run_scenario", [](const std::string& text, const std::string& output_root) {
        const auto r = cli::run_scenario(cli::parse_scenario(text), std::filesystem::path(output_root));
        return py::make_tuple(r.directory.string(), r.files);
    }, py::arg("config_text"), py::arg("output_root"),
       "Runs a YAML scenario; returns (output directory, file names).");

    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
