#include "due/sensitivity.hpp"

#include "due/error.hpp"

#include <cmath>

namespace due {
namespace {

void require_inputs(const OdeSystem& sys, const SampledFunction& x, const SampledFunction& u) {
    if (!sys.state_jacobian) throw Error(ErrorCode::MissingJacobian, "system does not provide D_x f");
    if (x.kind() != Interpretation::PiecewiseLinear || x.dim() != sys.state_dim) {
        throw Error(ErrorCode::InvalidArgument, "trajectory must be piecewise linear with state_dim rows");
    }
    if (!(u.grid() == x.grid()) || u.kind() != Interpretation::PiecewiseConstant ||
        u.dim() != sys.control_dim) {
        throw Error(ErrorCode::GridMismatch, "control does not match the trajectory grid");
    }
}

Matrix state_jac(const OdeSystem& sys, const Vector& x, const Vector& u, double t) {
    Matrix a = sys.state_jacobian(x, u, t);
    if (a.rows() != sys.state_dim || a.cols() != sys.state_dim || !a.allFinite()) {
        throw Error(ErrorCode::Diverged, "D_x f is malformed or not finite");
    }
    return a;
}

Matrix control_jac(const OdeSystem& sys, const Vector& x, const Vector& u, double t) {
    Matrix b = sys.control_jacobian(x, u, t);
    if (b.rows() != sys.state_dim || b.cols() != sys.control_dim || !b.allFinite()) {
        throw Error(ErrorCode::Diverged, "D_u f is malformed or not finite");
    }
    return b;
}

}  // namespace

const char* to_string(SensitivityMethod method) {
    switch (method) {
    case SensitivityMethod::VariationalOde: return "variational-ode";
    case SensitivityMethod::ClosedForm: return "closed-form";
    case SensitivityMethod::FiniteDifference: return "finite-difference";
    }
    return "unknown";
}

FundamentalMatrix::FundamentalMatrix(TimeGrid grid, std::vector<Matrix> nodes)
    : grid_(grid), nodes_(std::move(nodes)) {
    if (static_cast<int>(nodes_.size()) != grid_.n_bins() + 1) {
        throw Error(ErrorCode::GridMismatch, "fundamental matrix needs one entry per node");
    }
}

Matrix FundamentalMatrix::at(double t) const {
    if (t <= grid_.t0()) return nodes_.front();
    if (t >= grid_.tf()) return nodes_.back();
    const int k = grid_.bin_of(t);
    const double w = (t - grid_.node(k)) / grid_.dt();
    return (1.0 - w) * nodes_[k] + w * nodes_[k + 1];
}

SensitivityResult solve_variational(const OdeSystem& sys, const SampledFunction& x,
                                    const SampledFunction& u, const SampledFunction& du) {
    require_inputs(sys, x, u);
    if (!sys.control_jacobian) throw Error(ErrorCode::MissingJacobian, "system does not provide D_u f");
    if (!(du.grid() == u.grid()) || du.kind() != u.kind() || du.dim() != u.dim()) {
        throw Error(ErrorCode::GridMismatch, "direction does not match the control");
    }
    const TimeGrid& grid = x.grid();
    const int n = sys.state_dim;
    const double h = grid.dt();
    const Matrix eye = Matrix::Identity(n, n);

    Matrix z(n, grid.n_bins() + 1);
    z.col(0).setZero();
    for (int k = 0; k < grid.n_bins(); ++k) {
        const Vector uk = u.values().col(k);
        const Vector xl = x.values().col(k);
        const Vector xr = x.values().col(k + 1);
        const double tl = grid.node(k);
        const double tr = grid.node(k + 1);
        const Matrix al = state_jac(sys, xl, uk, tl);
        const Matrix ar = state_jac(sys, xr, uk, tr);
        const Vector forcing =
            0.5 * h * (control_jac(sys, xl, uk, tl) + control_jac(sys, xr, uk, tr)) * du.values().col(k);
        const Vector rhs = (eye + 0.5 * h * al) * z.col(k) + forcing;
        z.col(k + 1) = (eye - 0.5 * h * ar).partialPivLu().solve(rhs);
    }
    if (!z.allFinite()) throw Error(ErrorCode::Diverged, "variational solution is not finite");
    return {SampledFunction(grid, Interpretation::PiecewiseLinear, std::move(z)),
            SensitivityMethod::VariationalOde};
}

FundamentalMatrix fundamental_matrix(const OdeSystem& sys, const SampledFunction& x,
                                     const SampledFunction& u) {
    require_inputs(sys, x, u);
    const TimeGrid& grid = x.grid();
    const int n = sys.state_dim;
    const double h = grid.dt();
    const Matrix eye = Matrix::Identity(n, n);
    std::vector<Matrix> nodes;
    nodes.reserve(static_cast<std::size_t>(grid.n_bins()) + 1);
    nodes.push_back(eye);
    for (int k = 0; k < grid.n_bins(); ++k) {
        const Vector uk = u.values().col(k);
        const Matrix al = state_jac(sys, x.values().col(k), uk, grid.node(k));
        const Matrix ar = state_jac(sys, x.values().col(k + 1), uk, grid.node(k + 1));
        nodes.push_back((eye - 0.5 * h * ar).partialPivLu().solve((eye + 0.5 * h * al) * nodes.back()));
    }
    return FundamentalMatrix(grid, std::move(nodes));
}

SampledFunction variation_of_constants(const OdeSystem& sys, const FundamentalMatrix& m,
                                       const SampledFunction& x, const SampledFunction& u,
                                       const SampledFunction& du) {
    require_inputs(sys, x, u);
    if (!sys.control_jacobian) throw Error(ErrorCode::MissingJacobian, "system does not provide D_u f");
    if (!(m.grid() == x.grid()) || !(du.grid() == x.grid())) {
        throw Error(ErrorCode::GridMismatch, "fundamental matrix, trajectory and direction grids differ");
    }
    const TimeGrid& grid = x.grid();
    const double h = grid.dt();
    Matrix out(sys.state_dim, grid.n_bins() + 1);
    out.col(0).setZero();
    Vector integral = Vector::Zero(sys.state_dim);
    for (int k = 0; k < grid.n_bins(); ++k) {
        const Vector uk = u.values().col(k);
        const Vector duk = du.values().col(k);
        const Vector gl = control_jac(sys, x.values().col(k), uk, grid.node(k)) * duk;
        const Vector gr = control_jac(sys, x.values().col(k + 1), uk, grid.node(k + 1)) * duk;
        integral += 0.5 * h *
                    (m.at_node(k).partialPivLu().solve(gl) + m.at_node(k + 1).partialPivLu().solve(gr));
        out.col(k + 1) = m.at_node(k + 1) * integral;
    }
    return SampledFunction(grid, Interpretation::PiecewiseLinear, std::move(out));
}

SensitivityResult finite_difference_gateaux(const OdeSystem& sys, const Vector& x0,
                                            const SampledFunction& u, const SampledFunction& du,
                                            double eps, const PicardOptions& options) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw Error(ErrorCode::InvalidArgument, "finite-difference step must be > 0");
    }
    const PicardReport plus = picard_solve(sys, x0, u + eps * du, u.grid(), options);
    const PicardReport minus = picard_solve(sys, x0, u - eps * du, u.grid(), options);
    SensitivityResult out{(plus.trajectory - minus.trajectory) * (0.5 / eps),
                          SensitivityMethod::FiniteDifference};
    out.control_excursion = plus.control_excursion || minus.control_excursion;
    return out;
}

}  // namespace due
