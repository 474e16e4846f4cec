#include <doctest.h>

#include <cmath>
#include <random>

#include "qts/bases.hpp"
#include "qts/master.hpp"
#include "support.hpp"

using namespace qts;
using namespace qts::test;

namespace {

double unitarity_defect(const ComplexMatrix& v) {
    return max_diff(v.adjoint() * v, ComplexMatrix::identity(v.rows()));
}

} // namespace

TEST_CASE("decoherence basis of the two-level collapse operator") {
    const auto m = build_two_level(0.001, {0.02, 1.0});
    const auto d = diagonalize_lindblad(m.collapse_ops[0]);
    const double sg = std::sqrt(0.02);
    CHECK(unitarity_defect(d.transform.matrix) < 1e-12);
    CHECK(d.diagonal(0, 0).real() == rel_approx(-sg, 1e-12));
    CHECK(d.diagonal(1, 1).real() == rel_approx(sg, 1e-12));
    CHECK(std::abs(d.diagonal(0, 1)) + std::abs(d.diagonal(1, 0)) < 1e-15);
    // |V| entries: sqrt((1 -+ 1/sqrt2)/2)
    const double small = std::sqrt((1.0 - 1.0 / std::sqrt(2.0)) / 2.0);
    const double large = std::sqrt((1.0 + 1.0 / std::sqrt(2.0)) / 2.0);
    const auto& v = d.transform.matrix;
    CHECK(std::abs(v(0, 0)) == rel_approx(small, 1e-12));
    CHECK(std::abs(v(1, 0)) == rel_approx(large, 1e-12));
    CHECK(std::abs(v(0, 1)) == rel_approx(large, 1e-12));
    CHECK(std::abs(v(1, 1)) == rel_approx(small, 1e-12));
    // phase convention: the largest entry of each column is real positive
    CHECK(v(1, 0).imag() == 0.0);
    CHECK(v(1, 0).real() > 0.0);
    CHECK(v(0, 1).real() > 0.0);
}

TEST_CASE("already diagonal and non-normal inputs") {
    ComplexMatrix l = sigma_z();
    l *= std::sqrt(0.02);
    const auto d = diagonalize_lindblad(l);
    CHECK(d.transform.matrix == ComplexMatrix::identity(2));
    CHECK(max_diff(d.diagonal, l) == 0.0);
    CHECK_THROWS_AS(diagonalize_lindblad(ComplexMatrix(2, 2, {0, 1, 0, 0})), std::invalid_argument);

    const auto v = build_v_model(1.0, 0.001, {0.02, 1.0});
    CHECK_THROWS_AS(diagonalize_lindblad_set(v.collapse_ops), std::invalid_argument);
    CHECK_THROWS_AS(diagonalize_lindblad(v.collapse_ops[0]), std::invalid_argument);
}

TEST_CASE("pm basis of the V model") {
    const auto m = build_v_model(1.0, 0.001, {0.02, 1.0});
    const auto b = v_model_pm_basis();
    CHECK(unitarity_defect(b.matrix) < 1e-15);
    const double g = m.params.gamma;
    const double e = std::exp(-1.0);

    const auto h = transform_operator(m.hamiltonian, b);
    const ComplexMatrix expected(3, 3, {0, 0, 0, 0, 1.0 - 0.0005, -0.0005, 0, -0.0005, 1.0 - 0.0005});
    CHECK(max_diff(h, expected) < 1e-12);

    const auto down = transform_operator(m.collapse_ops[0], b);
    const auto up = transform_operator(m.collapse_ops[1], b);
    ComplexMatrix down_expected(3, 3), up_expected(3, 3);
    down_expected(0, 1) = std::sqrt(g);
    up_expected(1, 0) = std::sqrt(e * g);
    CHECK(max_diff(down, down_expected) < 1e-15);
    CHECK(max_diff(up, up_expected) < 1e-15);

    // |-> isolation in the new basis
    for (const auto* l : {&down, &up})
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs((*l)(2, j)) < 1e-14);
            CHECK(std::abs((*l)(j, 2)) < 1e-14);
        }

    ComplexMatrix p2(3, 3);
    p2(1, 1) = 1.0;
    const ComplexMatrix half(3, 3, {0, 0, 0, 0, 0.5, 0.5, 0, 0.5, 0.5});
    CHECK(max_diff(transform_state(p2, b), half) < 1e-15);

    std::mt19937_64 gen(2);
    const auto rho = random_state(3, gen);
    CHECK(max_diff(transform_state(transform_state(rho, b), b, Direction::Backward), rho) < 1e-15);
}

TEST_CASE("state transforms") {
    const auto m = build_two_level(0.001, {0.02, 1.0});
    const auto b = basis_for(m, BasisKind::Decoherence);
    const auto rho = transform_state(ground_state(m), b);
    const double r = 1.0 / (2.0 * std::sqrt(2.0));
    CHECK(rho(0, 0).real() == rel_approx(0.5 - r, 1e-14));
    CHECK(rho(1, 1).real() == rel_approx(0.5 + r, 1e-14));
    CHECK(rho(1, 0).real() == rel_approx(-r, 1e-14));
    CHECK(std::abs(rho(1, 0).imag()) < 1e-16);
    // equals (I - (sx + sz)/sqrt2)/2 in the decoherence basis
    ComplexMatrix expected = ComplexMatrix::identity(2) - (sigma_x() + sigma_z()) * cplx(1.0 / std::sqrt(2.0));
    expected *= 0.5;
    CHECK(max_diff(rho, expected) < 1e-15);

    const auto v = build_v_model(1.0, 0.001, {0.02, 1.0});
    const auto th = thermal_state(v);
    CHECK(max_diff(transform_state(th, v_model_pm_basis()), th) < 1e-15);

    std::mt19937_64 gen(4);
    const auto any = random_state(2, gen);
    CHECK(transform_state(any, basis_for(m, BasisKind::Eigen)) == any);
    CHECK_THROWS_AS(transform_state(random_state(3, gen), b), std::invalid_argument);
    CHECK_THROWS_AS(basis_for(m, BasisKind::PlusMinus), std::invalid_argument);
}

TEST_CASE("spectrum invariance under basis changes") {
    std::mt19937_64 gen(6);
    const auto m = build_two_level(0.001, {0.02, 1.0});
    const auto v = build_v_model(1.0, 0.001, {0.02, 1.0});
    for (int k = 0; k < 10; ++k) {
        const auto r2 = random_state(2, gen), r3 = random_state(3, gen);
        const auto a = hermitian_eigenvalues(r2), b = hermitian_eigenvalues(transform_state(r2, basis_for(m, BasisKind::Decoherence)));
        const auto c = hermitian_eigenvalues(r3), d = hermitian_eigenvalues(transform_state(r3, v_model_pm_basis()));
        for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(c[i] - d[i]) < 1e-10);
    }
}

TEST_CASE("dissipation in the decoherence basis only damps coherences") {
    const auto m = build_two_level(0.001, {0.02, 1.0});
    const auto d = diagonalize_lindblad(m.collapse_ops[0]);
    std::mt19937_64 gen(9);
    for (int k = 0; k < 10; ++k) {
        const auto rho = random_state(2, gen);
        const auto out = dissipator(d.diagonal, rho);
        CHECK(std::abs(out(0, 0)) < 1e-12);
        CHECK(std::abs(out(1, 1)) < 1e-12);
        CHECK(std::abs(out(1, 0) + 2.0 * 0.02 * rho(1, 0)) < 1e-12);
        CHECK(std::abs(out(0, 1) + 2.0 * 0.02 * rho(0, 1)) < 1e-12);
    }
}

TEST_CASE("generator covariance") {
    const auto m = build_two_level(0.001, {0.02, 1.0});
    const auto v = build_v_model(1.0, 0.001, {0.02, 1.0});
    const std::pair<Model, BasisTransform> cases[] = {{m, basis_for(m, BasisKind::Decoherence)},
                                                      {v, v_model_pm_basis()}};
    for (const auto& [model, basis] : cases) {
        const auto direct = assemble(model, basis).matrix;
        const auto fwd = superoperator_of(basis, Direction::Forward);
        const auto bwd = superoperator_of(basis, Direction::Backward);
        const auto conjugated = fwd * assemble(model).matrix * bwd;
        CHECK(max_diff(direct, conjugated) < 1e-10);
        CHECK(max_diff(fwd * bwd, ComplexMatrix::identity(model.dimension * model.dimension)) < 1e-14);
    }
}

TEST_CASE("Bloch map and drive vector") {
    const auto m = build_two_level(0.001, {0.02, 1.0});
    const auto b = basis_for(m, BasisKind::Decoherence);
    const auto s = bloch_map(transform_state(ground_state(m), b));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(s.sx == rel_approx(-r, 1e-12));
    CHECK(std::abs(s.sy) < 1e-16);
    CHECK(s.sz == rel_approx(-r, 1e-12));

    const auto omega = drive_vector(m);
    CHECK(omega.sx == rel_approx(0.001 * r, 1e-12));
    CHECK(std::abs(omega.sy) < 1e-18);
    CHECK(omega.sz == rel_approx(0.001 * r, 1e-12));

    const auto mb = model_in_basis(m, b);
    const auto zero = bloch_coherent_derivative(s, mb);
    CHECK(std::abs(zero.sx) + std::abs(zero.sy) + std::abs(zero.sz) < 1e-18);

    // right-handed: Omega x (1,0,0) = (0, Omega_z, -Omega_y) = (0, delta/sqrt2, 0)
    const auto dx = bloch_coherent_derivative({1, 0, 0}, mb);
    CHECK(std::abs(dx.sx) < 1e-18);
    CHECK(dx.sy == rel_approx(0.001 * r, 1e-12));
    CHECK(std::abs(dx.sz) < 1e-18);

    const auto mixed = bloch_map(ComplexMatrix::identity(2) * cplx(0.5));
    CHECK(mixed.sx == 0.0);
    CHECK(mixed.sy == 0.0);
    CHECK(mixed.sz == 0.0);

    // the coherent part of the generator is the same rotation
    std::mt19937_64 gen(10);
    for (int k = 0; k < 5; ++k) {
        const auto rho = random_state(2, gen);
        const auto h = mb.hamiltonian;
        const ComplexMatrix drho = (h * rho - rho * h) * cplx(0, -1);
        const auto before = bloch_map(rho);
        // bloch_map is affine; its linear part applied to drho
        const BlochVector rate{2.0 * drho(1, 0).real(), 2.0 * drho(1, 0).imag(),
                               (drho(0, 0) - drho(1, 1)).real()};
        const auto expected = bloch_coherent_derivative(before, mb);
        CHECK(rate.sx == rel_approx(expected.sx, 1e-9));
        CHECK(rate.sy == rel_approx(expected.sy, 1e-9));
        CHECK(rate.sz == rel_approx(expected.sz, 1e-9));
        CHECK(before.sx * before.sx + before.sy * before.sy + before.sz * before.sz <= 1.0 + 1e-8);
    }
}
