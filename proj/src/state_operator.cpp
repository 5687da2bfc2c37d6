#include "due/state_operator.hpp"

#include "due/error.hpp"
#include "due/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace due {
namespace {

void require_control(const OdeSystem& sys, const SampledFunction& u, const TimeGrid& grid) {
    if (!(u.grid() == grid)) {
        throw Error(ErrorCode::GridMismatch, "control is not defined on the solver grid");
    }
    if (u.kind() != Interpretation::PiecewiseConstant) {
        throw Error(ErrorCode::InvalidArgument, "control must be piecewise constant");
    }
    if (u.dim() != sys.control_dim) {
        throw Error(ErrorCode::InvalidArgument, "control dimension does not match the system");
    }
}

Vector eval_rhs(const OdeSystem& sys, const Vector& x, const Vector& u, double t) {
    Vector out = sys.rhs(x, u, t);
    if (out.size() != sys.state_dim) {
        throw Error(ErrorCode::InvalidArgument, "rhs returned wrong dimension");
    }
    if (!out.allFinite()) {
        std::ostringstream msg;
        msg << "rhs evaluation is not finite at t=" << t;
        throw Error(ErrorCode::Diverged, msg.str());
    }
    return out;
}

bool has_excursion(const OdeSystem& sys, const SampledFunction& u) {
    if (sys.control_box.lower.size() != sys.control_dim) return false;
    const double slack = 1e-12;
    for (int k = 0; k < u.size(); ++k) {
        if (!sys.control_box.contains(u.values().col(k), slack)) return true;
    }
    return false;
}

// Accumulated difference between Simpson (cubic Hermite midpoint) and the
// trapezoid rule, amplified by the Gronwall factor e^{L (tf - t0)}.
double estimate_quadrature_error(const OdeSystem& sys, const SampledFunction& u,
                                 const SampledFunction& x) {
    const TimeGrid& grid = x.grid();
    const double dt = grid.dt();
    Vector acc = Vector::Zero(sys.state_dim);
    double worst = 0.0;
    for (int k = 0; k < grid.n_bins(); ++k) {
        const Vector uk = u.values().col(k);
        const Vector xl = x.values().col(k);
        const Vector xr = x.values().col(k + 1);
        const Vector fl = eval_rhs(sys, xl, uk, grid.node(k));
        const Vector fr = eval_rhs(sys, xr, uk, grid.node(k + 1));
        const Vector xm = 0.5 * (xl + xr) + dt / 8.0 * (fl - fr);
        const Vector fm = eval_rhs(sys, xm, uk, grid.midpoint(k));
        acc += dt * (2.0 / 3.0) * (fm - 0.5 * (fl + fr));
        worst = std::max(worst, acc.norm());
    }
    return worst * std::exp(sys.lipschitz_L * grid.length());
}

}  // namespace

bool ControlBox::contains(const Vector& u, double slack) const {
    if (lower.size() != u.size() || upper.size() != u.size()) return false;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] < lower[i] - slack || u[i] > upper[i] + slack) return false;
    }
    return true;
}

void OdeSystem::validate() const {
    if (state_dim < 1 || control_dim < 0) {
        throw Error(ErrorCode::InvalidArgument, "ODE system needs state_dim >= 1");
    }
    if (!rhs) throw Error(ErrorCode::InvalidArgument, "ODE system has no right-hand side");
    if (!(bound_C > 0.0)) throw Error(ErrorCode::InvalidArgument, "declared bound C must be > 0");
    if (!(lipschitz_L >= 0.0) || !std::isfinite(lipschitz_L)) {
        throw Error(ErrorCode::InvalidArgument, "declared bound L must be finite and >= 0");
    }
    const bool has_box = control_box.lower.size() != 0 || control_box.upper.size() != 0;
    if (has_box && (control_box.lower.size() != control_dim || control_box.upper.size() != control_dim ||
                    (control_box.upper.array() < control_box.lower.array()).any())) {
        throw Error(ErrorCode::InvalidArgument, "control box is inconsistent with control_dim");
    }
}

TerminalCondition TerminalCondition::affine(Vector target, double tolerance) {
    TerminalCondition out;
    out.tolerance = tolerance;
    out.residual = [target = std::move(target)](const Vector& x, double) -> Vector { return x - target; };
    return out;
}

std::vector<double> PicardReport::contraction_ratios(double floor) const {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
        if (deltas[k] > floor && deltas[k + 1] > floor) out.push_back(deltas[k + 1] / deltas[k]);
    }
    return out;
}

SampledFunction apply_picard_map(const OdeSystem& sys, const Vector& x0,
                                 const SampledFunction& u, const SampledFunction& x) {
    const TimeGrid& grid = x.grid();
    require_control(sys, u, grid);
    if (x.kind() != Interpretation::PiecewiseLinear || x.dim() != sys.state_dim) {
        throw Error(ErrorCode::InvalidArgument, "trajectory must be piecewise linear with state_dim rows");
    }
    if (x0.size() != sys.state_dim) {
        throw Error(ErrorCode::InvalidArgument, "initial state has wrong dimension");
    }
    const double half_dt = 0.5 * grid.dt();
    Matrix out(sys.state_dim, grid.n_bins() + 1);
    out.col(0) = x0;
    for (int k = 0; k < grid.n_bins(); ++k) {
        const Vector uk = u.values().col(k);
        const Vector fl = eval_rhs(sys, x.values().col(k), uk, grid.node(k));
        const Vector fr = eval_rhs(sys, x.values().col(k + 1), uk, grid.node(k + 1));
        out.col(k + 1) = out.col(k) + half_dt * (fl + fr);
    }
    if (!out.allFinite()) throw Error(ErrorCode::Diverged, "Picard map produced non-finite values");
    return SampledFunction(grid, Interpretation::PiecewiseLinear, std::move(out));
}

PicardReport picard_solve(const OdeSystem& sys, const Vector& x0, const SampledFunction& u,
                          const TimeGrid& grid, const PicardOptions& options) {
    sys.validate();
    require_control(sys, u, grid);
    if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "Picard tolerance must be > 0");
    if (options.max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");

    const SampledFunction start =
        SampledFunction::constant(grid, Interpretation::PiecewiseLinear, x0);

    PicardReport report{start, 0, 1.0, 0.0, {}};
    report.control_excursion = has_excursion(sys, u);

    if (sys.lipschitz_L == 0.0) {
        // f does not depend on x: one application is the fixed point.
        report.alpha = 1.0;
        report.kappa = 0.0;
        SampledFunction next = apply_picard_map(sys, x0, u, start);
        report.deltas.push_back(weighted_norm(next - start, report.alpha));
        report.trajectory = std::move(next);
        report.iterations = 1;
        report.bound = 0.0;
    } else {
        report.alpha = 2.0 * sys.lipschitz_L;
        report.kappa = 0.5;
        SampledFunction current = start;
        bool converged = false;
        for (int it = 1; it <= options.max_iterations; ++it) {
            SampledFunction next = apply_picard_map(sys, x0, u, current);
            const double delta = weighted_norm(next - current, report.alpha);
            if (!std::isfinite(delta)) throw Error(ErrorCode::Diverged, "Picard iterates diverged");
            report.deltas.push_back(delta);
            report.iterations = it;
            // ||next - x*|| <= ||next - Phi(next)|| / (1-kappa) <= kappa delta / (1-kappa).
            report.bound = aposteriori_bound(report.kappa, report.kappa * delta);
            current = std::move(next);
            if (delta <= options.tol * (1.0 - report.kappa)) {
                converged = true;
                break;
            }
        }
        report.trajectory = std::move(current);
        if (!converged) {
            throw NoConvergenceError("Picard iteration did not reach tolerance", report.iterations,
                                     report.bound);
        }
    }

    report.quadrature_error = estimate_quadrature_error(sys, u, report.trajectory);

    if (sys.state_jacobian) {
        report.measured_lipschitz = measure_state_lipschitz(sys, report.trajectory, u);
        const double slack = 1e-9 * (1.0 + sys.lipschitz_L);
        if (report.measured_lipschitz > sys.lipschitz_L + slack) {
            report.lipschitz_exceeded = true;
            std::ostringstream msg;
            msg << "sampled ||D_x f|| = " << report.measured_lipschitz << " exceeds declared L = "
                << sys.lipschitz_L;
            log(LogLevel::Warn, msg.str());
        }
    }
    return report;
}

double aposteriori_bound(double kappa, double residual) {
    if (!(kappa >= 0.0) || !(kappa < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "contraction constant must lie in [0, 1)");
    }
    if (!(residual >= 0.0)) throw Error(ErrorCode::InvalidArgument, "residual must be >= 0");
    return residual / (1.0 - kappa);
}

Vector terminal_residual(const TerminalCondition& gamma, const SampledFunction& trajectory) {
    if (!gamma.residual) throw Error(ErrorCode::InvalidArgument, "terminal condition has no residual map");
    return gamma.residual(trajectory.values().col(trajectory.size() - 1), trajectory.grid().tf());
}

double measure_state_lipschitz(const OdeSystem& sys, const SampledFunction& trajectory,
                               const SampledFunction& u, double radius) {
    if (!sys.state_jacobian) {
        throw Error(ErrorCode::MissingJacobian, "system does not provide D_x f");
    }
    const TimeGrid& grid = trajectory.grid();
    double worst = 0.0;
    auto probe = [&](const Vector& x, const Vector& uk, double t) {
        const Matrix jac = sys.state_jacobian(x, uk, t);
        if (jac.size() == 0) return;
        const double norm = Eigen::JacobiSVD<Matrix>(jac).singularValues()(0);
        worst = std::max(worst, norm);
    };
    for (int k = 0; k <= grid.n_bins(); ++k) {
        const Vector uk = u.values().col(std::min(k, grid.n_bins() - 1));
        const Vector xk = trajectory.values().col(k);
        probe(xk, uk, grid.node(k));
        if (radius > 0.0) {
            for (int i = 0; i < sys.state_dim; ++i) {
                Vector shifted = xk;
                shifted[i] += radius;
                probe(shifted, uk, grid.node(k));
                shifted[i] -= 2.0 * radius;
                probe(shifted, uk, grid.node(k));
            }
        }
    }
    return worst;
}

std::vector<ContinuityPoint> continuity_probe(const OdeSystem& sys, const Vector& x0,
                                              const SampledFunction& u, const SampledFunction& du,
                                              const std::vector<double>& epsilons,
                                              const PicardOptions& options) {
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "epsilons must be decreasing");
        }
    }
    const PicardReport base = picard_solve(sys, x0, u, u.grid(), options);
    std::vector<ContinuityPoint> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons) {
        const PicardReport perturbed = picard_solve(sys, x0, u + eps * du, u.grid(), options);
        out.push_back({eps, sup_norm(perturbed.trajectory - base.trajectory)});
    }
    return out;
}

}  // namespace due
