#pragma once

#include "due/function_space.hpp"
#include "due/state_operator.hpp"

#include <vector>

namespace due {

enum class SensitivityMethod { VariationalOde, ClosedForm, FiniteDifference };

const char* to_string(SensitivityMethod method);

/// Directional (Gateaux) derivative of the state operator along a control
/// perturbation. `delta_x` is piecewise linear and vanishes at t0.
struct SensitivityResult {
    SampledFunction delta_x;
    SensitivityMethod method;
    /// A perturbed control left the declared box (finite differences only).
    bool control_excursion = false;
};

/// Solution of V' = D_x f(x(t), u(t), t) V with V(t0) = I, stored at grid nodes.
class FundamentalMatrix {
public:
    FundamentalMatrix(TimeGrid grid, std::vector<Matrix> nodes);

    const TimeGrid& grid() const noexcept { return grid_; }
    const Matrix& at_node(int k) const { return nodes_.at(static_cast<std::size_t>(k)); }
    /// Linear interpolation between nodes.
    Matrix at(double t) const;

private:
    TimeGrid grid_;
    std::vector<Matrix> nodes_;
};

/// Solves z' = A(t) z + D_u f Delta u, z(t0) = 0 along the trajectory `x`
/// with the same implicit trapezoid scheme the Picard map uses, so `z` is the
/// exact derivative of the discrete state operator.
SensitivityResult solve_variational(const OdeSystem& sys, const SampledFunction& x,
                                    const SampledFunction& u, const SampledFunction& du);

FundamentalMatrix fundamental_matrix(const OdeSystem& sys, const SampledFunction& x,
                                     const SampledFunction& u);

/// delta x(t) = M(t) int_{t0}^t M(s)^{-1} D_u f(s) Delta u(s) ds, trapezoid in s.
/// Validation path for solve_variational; solves with M(s) instead of inverting it.
SampledFunction variation_of_constants(const OdeSystem& sys, const FundamentalMatrix& m,
                                       const SampledFunction& x, const SampledFunction& u,
                                       const SampledFunction& du);

/// Central difference (x(u + eps du) - x(u - eps du)) / (2 eps) through picard_solve.
SensitivityResult finite_difference_gateaux(const OdeSystem& sys, const Vector& x0,
                                            const SampledFunction& u, const SampledFunction& du,
                                            double eps, const PicardOptions& options = {});

}  // namespace due
