#include "due/builtin_systems.hpp"
#include "due/error.hpp"
#include "due/state_operator.hpp"

#include "oracles/rk4.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace due;

namespace {

SampledFunction control(const TimeGrid& grid, double (*fn)(double)) {
    return SampledFunction::from_callable(grid, Interpretation::PiecewiseConstant, 1,
                                          [fn](double t) { return Vector::Constant(1, fn(t)); });
}

SampledFunction zero_control(const TimeGrid& grid) { return SampledFunction(grid, 1, Interpretation::PiecewiseConstant); }

double max_error(const SampledFunction& x, double (*exact)(double)) {
    double worst = 0.0;
    for (int k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x(0, k) - exact(x.grid().node(k))));
    return worst;
}

OdeSystem zero_system() {
    OdeSystem sys = builtin_system("integrator");
    sys.rhs = [](const Vector& x, const Vector&, double) -> Vector { return Vector::Zero(x.size()); };
    return sys;
}

}  // namespace

TEST_CASE("picard_solve: zero rhs keeps the initial state") {
    const TimeGrid grid(0.0, 1.0, 50);
    const auto report = picard_solve(zero_system(), Vector::Ones(1), zero_control(grid), grid);
    CHECK(sup_norm(report.trajectory - SampledFunction::constant(grid, Interpretation::PiecewiseLinear, Vector::Ones(1))) == 0.0);
    CHECK(report.iterations == 1);
}

TEST_CASE("picard_solve: pure integration of u = 2t") {
    const TimeGrid grid(0.0, 1.0, 1000);
    const auto report =
        picard_solve(builtin_system("integrator"), Vector::Zero(1), control(grid, [](double t) { return 2.0 * t; }), grid);
    CHECK(max_error(report.trajectory, [](double t) { return t * t; }) <= 1e-6);
    CHECK(report.kappa == 0.0);
    CHECK(report.alpha == 1.0);
    CHECK(report.trajectory(0, 0) == 0.0);
}

TEST_CASE("picard_solve: decay matches the exponential and contracts by 1/2") {
    const TimeGrid grid(0.0, 1.0, 1000);
    const auto report = picard_solve(builtin_system("decay"), Vector::Ones(1), zero_control(grid), grid, {1e-12, 200});
    CHECK(max_error(report.trajectory, [](double t) { return std::exp(-t); }) <= 1e-6);
    CHECK(report.alpha == 2.0);
    CHECK(report.trajectory(0, 0) == 1.0);
    for (double r : report.contraction_ratios()) CHECK(r <= 0.5 + 1e-2);
    CHECK(report.bound <= 1e-12);
    CHECK(report.quadrature_error > 0.0);
    CHECK(report.quadrature_error < 1e-6);
    CHECK_FALSE(report.lipschitz_exceeded);
}

TEST_CASE("picard_solve: fixed-point residual is within tolerance") {
    const TimeGrid grid(0.0, 2.0, 400);
    const OdeSystem sys = builtin_system("cubic");
    const Vector x0 = Vector::Constant(1, 0.5);
    const auto u = control(grid, [](double t) { return 0.3 * std::sin(3.0 * t); });
    const double tol = 1e-9;
    const auto report = picard_solve(sys, x0, u, grid, {tol, 500});
    const auto residual = report.trajectory - apply_picard_map(sys, x0, u, report.trajectory);
    CHECK(weighted_norm(residual, 2.0 * sys.lipschitz_L) <= tol);
}

TEST_CASE("picard_solve: different starting guesses reach the same trajectory") {
    // Start a second run from the converged trajectory of a shifted initial
    // guess: iterate Phi by hand from a non-constant function.
    const TimeGrid grid(0.0, 1.0, 200);
    const OdeSystem sys = builtin_system("cubic");
    const Vector x0 = Vector::Constant(1, 0.5);
    const auto u = control(grid, [](double t) { return 0.2 + 0.1 * t; });
    const double tol = 1e-10;
    const auto report = picard_solve(sys, x0, u, grid, {tol, 500});

    auto guess = SampledFunction::from_callable(grid, Interpretation::PiecewiseLinear, 1,
                                                [](double t) { return Vector::Constant(1, std::cos(5.0 * t)); });
    for (int it = 0; it < 500; ++it) {
        const auto next = apply_picard_map(sys, x0, u, guess);
        const double delta = weighted_norm(next - guess, 2.0 * sys.lipschitz_L);
        guess = next;
        if (delta <= 0.5 * tol) break;
    }
    CHECK(weighted_norm(report.trajectory - guess, 2.0 * sys.lipschitz_L) <= 2.0 * tol);
}

TEST_CASE("picard_solve agrees with an RK4 reference") {
    const TimeGrid grid(0.0, 2.0, 500);
    for (const char* name : {"decay", "linear_forced", "cubic"}) {
        CAPTURE(name);
        const OdeSystem sys = builtin_system(name);
        const Vector x0 = Vector::Constant(1, 0.7);
        const auto u = control(grid, [](double t) { return 0.5 * std::cos(2.0 * t); });
        const auto report = picard_solve(sys, x0, u, grid, {1e-12, 500});
        const Matrix reference = oracle::rk4_nodes(sys, x0, u);
        const double diff = (report.trajectory.values() - reference).cwiseAbs().maxCoeff();
        CHECK(diff <= 10.0 * std::max(report.quadrature_error, 1e-12));
    }
}

TEST_CASE("apply_picard_map examples") {
    const TimeGrid grid(0.0, 1.0, 100);
    const auto u = zero_control(grid);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    Matrix arbitrary(1, grid.n_bins() + 1);
    for (Eigen::Index i = 0; i < arbitrary.size(); ++i) arbitrary.data()[i] = dist(rng);
    const SampledFunction x(grid, Interpretation::PiecewiseLinear, arbitrary);
    const auto out = apply_picard_map(zero_system(), Vector::Constant(1, 3.0), u, x);
    CHECK(out.values().isConstant(3.0));

    // Phi(1)(t) = 1 - t for f = -x.
    const auto ones = SampledFunction::constant(grid, Interpretation::PiecewiseLinear, Vector::Ones(1));
    const auto phi = apply_picard_map(builtin_system("decay"), Vector::Ones(1), u, ones);
    CHECK(max_error(phi, [](double t) { return 1.0 - t; }) <= 1e-14);

    // A converged trajectory is (numerically) fixed.
    const auto report = picard_solve(builtin_system("decay"), Vector::Ones(1), u, grid, {1e-13, 200});
    const auto again = apply_picard_map(builtin_system("decay"), Vector::Ones(1), u, report.trajectory);
    CHECK(sup_norm(again - report.trajectory) <= 1e-12);
}

TEST_CASE("aposteriori_bound examples and errors") {
    CHECK(aposteriori_bound(0.5, 0.1) == doctest::Approx(0.2));
    CHECK(aposteriori_bound(0.0, 0.37) == 0.37);
    CHECK(aposteriori_bound(0.9, 0.01) == doctest::Approx(0.1));
    CHECK_THROWS_AS(aposteriori_bound(1.0, 0.1), Error);
    CHECK_THROWS_AS(aposteriori_bound(1.5, 0.1), Error);
    CHECK_THROWS_AS(aposteriori_bound(0.5, -1.0), Error);
}

TEST_CASE("terminal_residual examples") {
    const TimeGrid grid(0.0, 1.0, 10);
    const auto gamma = TerminalCondition::affine(Vector::Constant(1, 10.0));
    const auto hit = SampledFunction::constant(grid, Interpretation::PiecewiseLinear, Vector::Constant(1, 10.0));
    CHECK(terminal_residual(gamma, hit)(0) == 0.0);
    Matrix m = Matrix::Zero(1, 11);
    m(0, 10) = 9.5;
    CHECK(terminal_residual(gamma, SampledFunction(grid, Interpretation::PiecewiseLinear, m))(0) == doctest::Approx(-0.5));
}

TEST_CASE("picard_solve error paths") {
    const TimeGrid grid(0.0, 1.0, 20);
    const auto u = zero_control(grid);

    OdeSystem blowup = builtin_system("decay");
    blowup.rhs = [](const Vector& x, const Vector&, double) -> Vector { return x / 0.0; };
    try {
        picard_solve(blowup, Vector::Ones(1), u, grid);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Diverged);
    }

    try {
        picard_solve(builtin_system("decay"), Vector::Ones(1), u, grid, {1e-14, 2});
        FAIL("expected no convergence");
    } catch (const NoConvergenceError& e) {
        CHECK(e.iterations() == 2);
        CHECK(e.last_bound() > 1e-14);
    }

    CHECK_THROWS_AS(picard_solve(builtin_system("decay"), Vector::Ones(1), u, grid, {0.0, 10}), Error);
    CHECK_THROWS_AS(picard_solve(builtin_system("decay"), Vector::Ones(1), u, TimeGrid(0.0, 1.0, 21)), Error);
}

TEST_CASE("declared Lipschitz constant is checked along the trajectory") {
    const TimeGrid grid(0.0, 1.0, 50);
    OdeSystem sys = builtin_system("decay");
    sys.rhs = [](const Vector& x, const Vector&, double) -> Vector { return -4.0 * x; };
    sys.state_jacobian = [](const Vector&, const Vector&, double) { return Matrix::Constant(1, 1, -4.0); };
    const auto report = picard_solve(sys, Vector::Ones(1), zero_control(grid), grid, {1e-8, 500});
    CHECK(report.lipschitz_exceeded);
    CHECK(report.measured_lipschitz == doctest::Approx(4.0));
    CHECK(measure_state_lipschitz(builtin_system("cubic"), report.trajectory, zero_control(grid), 0.1) > 0.0);
}

TEST_CASE("control excursions are flagged, not rejected") {
    const TimeGrid grid(0.0, 1.0, 20);
    const auto u = SampledFunction::constant(grid, Interpretation::PiecewiseConstant, Vector::Constant(1, 5.0));
    const auto report = picard_solve(builtin_system("linear_forced"), Vector::Zero(1), u, grid);
    CHECK(report.control_excursion);
}

TEST_CASE("continuity_probe examples") {
    const TimeGrid grid(0.0, 2.0, 200);
    const auto u = control(grid, [](double t) { return 0.5 * t; });
    const std::vector<double> eps{1e-1, 1e-2, 1e-3};

    for (const auto& p : continuity_probe(builtin_system("linear_forced"), Vector::Zero(1), u, zero_control(grid), eps)) {
        CHECK(p.deviation == 0.0);
    }

    const auto one = SampledFunction::constant(grid, Interpretation::PiecewiseConstant, Vector::Ones(1));
    for (const auto& p : continuity_probe(builtin_system("integrator"), Vector::Zero(1), u, one, eps)) {
        CHECK(p.deviation == doctest::Approx(p.epsilon * 2.0).epsilon(1e-12));
    }

    // Linear system: deviation / eps is the same for every eps (sup of 1 - e^{-t}).
    const auto points = continuity_probe(builtin_system("linear_forced"), Vector::Zero(1), u, one, eps, {1e-14, 500});
    const double slope = points.front().deviation / points.front().epsilon;
    CHECK(slope == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-4));
    for (const auto& p : points) CHECK(std::abs(p.deviation / p.epsilon - slope) <= 1e-2 * slope);

    CHECK_THROWS_AS(continuity_probe(builtin_system("integrator"), Vector::Zero(1), u, one, {1e-2, 1e-1}), Error);
    CHECK_THROWS_AS(continuity_probe(builtin_system("integrator"), Vector::Zero(1), u, one, {-1e-2}), Error);
}
