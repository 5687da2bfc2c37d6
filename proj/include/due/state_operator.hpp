#pragma once

#include "due/function_space.hpp"

#include <functional>
#include <vector>

namespace due {

/// Box bounds on control values.
struct ControlBox {
    Vector lower;
    Vector upper;

    /// True when every component lies in [lower - slack, upper + slack].
    bool contains(const Vector& u, double slack = 0.0) const;
};

using RhsFn = std::function<Vector(const Vector& x, const Vector& u, double t)>;
using JacobianFn = std::function<Matrix(const Vector& x, const Vector& u, double t)>;

/// Right-hand side dx/dt = f(x, u, t) together with the user's declared
/// bounds |f| <= C and ||D_x f|| <= L. The solver trusts the declared L.
struct OdeSystem {
    int state_dim = 0;
    int control_dim = 0;
    RhsFn rhs;
    JacobianFn state_jacobian;    // D_x f, may be empty
    JacobianFn control_jacobian;  // D_u f, may be empty
    double bound_C = 1.0;
    double lipschitz_L = 0.0;
    ControlBox control_box;

    /// Throws InvalidArgument when dimensions or bounds are inconsistent.
    void validate() const;
};

/// Endpoint condition Gamma(x(tf), tf) = 0.
struct TerminalCondition {
    std::function<Vector(const Vector& x, double t)> residual;
    double tolerance = 1e-9;

    /// Gamma(x, t) = x - target.
    static TerminalCondition affine(Vector target, double tolerance = 1e-9);
};

struct PicardOptions {
    double tol = 1e-10;  // target distance to the fixed point in the weighted norm
    int max_iterations = 1000;
};

struct PicardReport {
    SampledFunction trajectory;
    int iterations = 0;
    double alpha = 1.0;
    double kappa = 0.0;
    /// deltas[k] = ||x_{k+1} - x_k||_alpha for successive Picard iterates.
    std::vector<double> deltas;
    /// A-posteriori distance of the returned trajectory to the fixed point.
    double bound = 0.0;
    /// Estimated discretization error of the quadrature (separate from bound).
    double quadrature_error = 0.0;
    /// Largest sampled ||D_x f|| along the trajectory, or -1 when D_x f is absent.
    double measured_lipschitz = -1.0;
    bool lipschitz_exceeded = false;
    /// Some control sample lies outside the declared box.
    bool control_excursion = false;

    /// delta_{k+1} / delta_k for deltas above `floor`.
    std::vector<double> contraction_ratios(double floor = 1e-13) const;
};

/// Phi(u, x)(t) = x0 + int_{t0}^t f(x(s), u(s), s) ds, trapezoid per bin with
/// the bin's control value. `x` is piecewise linear, `u` piecewise constant.
SampledFunction apply_picard_map(const OdeSystem& sys, const Vector& x0,
                                 const SampledFunction& u, const SampledFunction& x);

/// Fixed point of Phi(u, .) by Picard iteration started from the constant x0,
/// in the weighted norm with alpha = 2L (kappa = 1/2). Declared L = 0 uses
/// alpha = 1 and a single exact application.
PicardReport picard_solve(const OdeSystem& sys, const Vector& x0, const SampledFunction& u,
                          const TimeGrid& grid, const PicardOptions& options = {});

/// residual / (1 - kappa).
double aposteriori_bound(double kappa, double residual);

Vector terminal_residual(const TerminalCondition& gamma, const SampledFunction& trajectory);

/// Samples ||D_x f||_2 along the trajectory (and at `radius`-offsets along
/// each state axis when radius > 0). Throws MissingJacobian if D_x f is absent.
double measure_state_lipschitz(const OdeSystem& sys, const SampledFunction& trajectory,
                               const SampledFunction& u, double radius = 0.0);

struct ContinuityPoint {
    double epsilon;
    double deviation;  // sup_norm(x(u + eps du) - x(u))
};

std::vector<ContinuityPoint> continuity_probe(const OdeSystem& sys, const Vector& x0,
                                              const SampledFunction& u, const SampledFunction& du,
                                              const std::vector<double>& epsilons,
                                              const PicardOptions& options = {});

}  // namespace due
