#include "due/builtin_systems.hpp"
#include "due/error.hpp"
#include "due/sensitivity.hpp"

#include "oracles/matrix_exp.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace due;

namespace {

SampledFunction constant_control(const TimeGrid& grid, double value) {
    return SampledFunction::constant(grid, Interpretation::PiecewiseConstant, Vector::Constant(1, value));
}

SampledFunction random_direction(const TimeGrid& grid, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(dim, grid.n_bins());
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return SampledFunction(grid, Interpretation::PiecewiseConstant, m);
}

}  // namespace

TEST_CASE("solve_variational: zero direction gives zero derivative") {
    const TimeGrid grid(0.0, 1.0, 100);
    const OdeSystem sys = builtin_system("cubic");
    const auto u = constant_control(grid, 0.2);
    const auto x = picard_solve(sys, Vector::Constant(1, 0.5), u, grid).trajectory;
    const auto result = solve_variational(sys, x, u, constant_control(grid, 0.0));
    CHECK(sup_norm(result.delta_x) == 0.0);
    CHECK(result.method == SensitivityMethod::VariationalOde);
}

TEST_CASE("solve_variational: forced linear system has 1 - e^{-t}") {
    const TimeGrid grid(0.0, 1.0, 1000);
    const OdeSystem sys = builtin_system("linear_forced");
    const auto u = constant_control(grid, 0.3);
    const auto x = picard_solve(sys, Vector::Zero(1), u, grid).trajectory;
    const auto result = solve_variational(sys, x, u, constant_control(grid, 1.0));
    CHECK(result.delta_x(0, 0) == 0.0);
    for (int k = 0; k <= grid.n_bins(); ++k) {
        CHECK(std::abs(result.delta_x(0, k) - (1.0 - std::exp(-grid.node(k)))) <= 1e-6);
    }
}

TEST_CASE("fundamental_matrix examples") {
    const TimeGrid grid(0.0, 1.0, 1000);
    const auto u = constant_control(grid, 0.0);

    const OdeSystem integrator = builtin_system("integrator");
    const auto xi = picard_solve(integrator, Vector::Zero(1), u, grid).trajectory;
    const auto mi = fundamental_matrix(integrator, xi, u);
    for (int k = 0; k <= grid.n_bins(); ++k) CHECK(mi.at_node(k)(0, 0) == 1.0);

    const OdeSystem decay = builtin_system("decay");
    const auto xd = picard_solve(decay, Vector::Ones(1), u, grid).trajectory;
    const auto md = fundamental_matrix(decay, xd, u);
    CHECK(md.at_node(0)(0, 0) == 1.0);
    for (int k = 0; k <= grid.n_bins(); k += 50) {
        CHECK(std::abs(md.at_node(k)(0, 0) - std::exp(-grid.node(k))) <= 1e-6);
    }
    CHECK(md.at(0.5)(0, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));

    Matrix a(2, 2);
    a << 0.0, 1.0, -2.0, -0.3;
    const OdeSystem lin = linear_system(a, Matrix::Zero(2, 1), {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)}, 1.0);
    const auto xl = picard_solve(lin, Vector::Ones(2), u, grid, {1e-12, 500}).trajectory;
    const auto ml = fundamental_matrix(lin, xl, u);
    CHECK((ml.at_node(grid.n_bins()) - oracle::expm(a)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("finite differences reproduce the linear response") {
    const TimeGrid grid(0.0, 1.0, 1000);
    const OdeSystem sys = builtin_system("linear_forced");
    const auto u = constant_control(grid, 0.3);
    const auto du = constant_control(grid, 1.0);
    const auto fd = finite_difference_gateaux(sys, Vector::Zero(1), u, du, 1e-4, {1e-14, 500});
    CHECK(fd.method == SensitivityMethod::FiniteDifference);
    for (int k = 0; k <= grid.n_bins(); ++k) {
        CHECK(std::abs(fd.delta_x(0, k) - (1.0 - std::exp(-grid.node(k)))) <= 1e-6);
    }
    const auto x = picard_solve(sys, Vector::Zero(1), u, grid, {1e-14, 500}).trajectory;
    const auto var = solve_variational(sys, x, u, du);
    for (double eps : {1e-1, 1e-3}) {
        const auto other = finite_difference_gateaux(sys, Vector::Zero(1), u, du, eps, {1e-14, 500});
        CHECK(sup_norm(other.delta_x - var.delta_x) <= 1e-8);
    }
    CHECK_THROWS_AS(finite_difference_gateaux(sys, Vector::Zero(1), u, du, 0.0), Error);
}

TEST_CASE("nonlinear system: finite differences agree with the variational solution") {
    const TimeGrid grid(0.0, 1.0, 1000);
    const OdeSystem sys = builtin_system("cubic");
    const Vector x0 = Vector::Constant(1, 0.5);
    const auto u = constant_control(grid, 0.1);
    const auto du = constant_control(grid, 1.0);
    const PicardOptions tight{1e-15, 1000};
    const auto x = picard_solve(sys, x0, u, grid, tight).trajectory;
    const auto var = solve_variational(sys, x, u, du);
    const double scale = sup_norm(var.delta_x);
    const double e1 = sup_norm(finite_difference_gateaux(sys, x0, u, du, 1e-4, tight).delta_x - var.delta_x);
    const double e2 = sup_norm(finite_difference_gateaux(sys, x0, u, du, 2e-4, tight).delta_x - var.delta_x);
    CHECK(e1 / scale <= 1e-4);
    // Central differences: halving eps divides the error by about four.
    CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("derivative is linear in the direction") {
    const TimeGrid grid(0.0, 1.5, 300);
    const OdeSystem sys = builtin_system("cubic");
    const auto u = constant_control(grid, -0.2);
    const auto x = picard_solve(sys, Vector::Constant(1, 0.4), u, grid).trajectory;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d1 = random_direction(grid, 1, 2 * seed);
        const auto d2 = random_direction(grid, 1, 2 * seed + 1);
        const double a = 0.3 + seed;
        const double b = -1.7;
        const auto lhs = solve_variational(sys, x, u, a * d1 + b * d2).delta_x;
        const auto rhs = a * solve_variational(sys, x, u, d1).delta_x + b * solve_variational(sys, x, u, d2).delta_x;
        CHECK(sup_norm(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("variation of constants matches the variational solution on linear systems") {
    const TimeGrid grid(0.0, 2.0, 400);
    Matrix a(2, 2);
    a << -0.5, 1.0, -1.0, -0.2;
    Matrix b(2, 1);
    b << 0.0, 1.0;
    const OdeSystem sys = linear_system(a, b, {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)}, 2.0);
    const auto u = random_direction(grid, 1, 99);
    const auto du = random_direction(grid, 1, 100);
    const auto x = picard_solve(sys, Vector::Ones(2), u, grid, {1e-12, 500}).trajectory;
    const auto m = fundamental_matrix(sys, x, u);
    const auto voc = variation_of_constants(sys, m, x, u, du);
    const auto var = solve_variational(sys, x, u, du);
    CHECK(sup_norm(voc - var.delta_x) <= 1e-8);
}

TEST_CASE("missing Jacobians raise a capability error") {
    const TimeGrid grid(0.0, 1.0, 10);
    OdeSystem sys = builtin_system("linear_forced");
    const auto u = constant_control(grid, 0.0);
    const auto x = picard_solve(sys, Vector::Zero(1), u, grid).trajectory;
    sys.control_jacobian = nullptr;
    try {
        solve_variational(sys, x, u, u);
        FAIL("expected a capability error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingJacobian);
    }
    sys.state_jacobian = nullptr;
    CHECK_THROWS_AS(fundamental_matrix(sys, x, u), Error);
}

TEST_CASE("finite differences flag perturbed controls outside the box") {
    const TimeGrid grid(0.0, 1.0, 10);
    const OdeSystem sys = builtin_system("cubic");
    const auto edge = constant_control(grid, 1.0);
    const auto fd = finite_difference_gateaux(sys, Vector::Zero(1), edge, constant_control(grid, 1.0), 1e-3);
    CHECK(fd.control_excursion);
}
