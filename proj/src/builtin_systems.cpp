#include "due/builtin_systems.hpp"

#include "due/error.hpp"

#include <algorithm>
#include <cmath>

namespace due {
namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

ControlBox unit_box(double lo, double hi) { return {Vector::Constant(1, lo), Vector::Constant(1, hi)}; }

}  // namespace

std::vector<std::string> builtin_system_names() { return {"decay", "integrator", "linear_forced", "cubic"}; }

OdeSystem builtin_system(const std::string& name) {
    OdeSystem sys;
    sys.state_dim = 1;
    sys.control_dim = 1;
    if (name == "decay") {
        sys.rhs = [](const Vector& x, const Vector&, double) -> Vector { return -x; };
        sys.state_jacobian = [](const Vector&, const Vector&, double) { return scalar(-1.0); };
        sys.control_jacobian = [](const Vector&, const Vector&, double) { return scalar(0.0); };
        sys.bound_C = 2.0;
        sys.lipschitz_L = 1.0;
        sys.control_box = unit_box(-1.0, 1.0);
    } else if (name == "integrator") {
        sys.rhs = [](const Vector&, const Vector& u, double) -> Vector { return u; };
        sys.state_jacobian = [](const Vector&, const Vector&, double) { return scalar(0.0); };
        sys.control_jacobian = [](const Vector&, const Vector&, double) { return scalar(1.0); };
        sys.bound_C = 10.0;
        sys.lipschitz_L = 0.0;
        sys.control_box = unit_box(-10.0, 10.0);
    } else if (name == "linear_forced") {
        sys.rhs = [](const Vector& x, const Vector& u, double) -> Vector { return u - x; };
        sys.state_jacobian = [](const Vector&, const Vector&, double) { return scalar(-1.0); };
        sys.control_jacobian = [](const Vector&, const Vector&, double) { return scalar(1.0); };
        sys.bound_C = 4.0;
        sys.lipschitz_L = 1.0;
        sys.control_box = unit_box(-2.0, 2.0);
    } else if (name == "cubic") {
        sys.rhs = [](const Vector& x, const Vector& u, double) -> Vector {
            return u.array() - x.array().cube();
        };
        sys.state_jacobian = [](const Vector& x, const Vector&, double) { return scalar(-3.0 * x[0] * x[0]); };
        sys.control_jacobian = [](const Vector&, const Vector&, double) { return scalar(1.0); };
        sys.bound_C = 2.0;
        sys.lipschitz_L = 3.0;
        sys.control_box = unit_box(-1.0, 1.0);
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown built-in system '" + name + "'");
    }
    return sys;
}

OdeSystem linear_system(const Matrix& a, const Matrix& b, const ControlBox& box, double state_radius) {
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw Error(ErrorCode::InvalidArgument, "linear system matrices have inconsistent shapes");
    }
    OdeSystem sys;
    sys.state_dim = static_cast<int>(a.rows());
    sys.control_dim = static_cast<int>(b.cols());
    sys.rhs = [a, b](const Vector& x, const Vector& u, double) -> Vector { return a * x + b * u; };
    sys.state_jacobian = [a](const Vector&, const Vector&, double) -> Matrix { return a; };
    sys.control_jacobian = [b](const Vector&, const Vector&, double) -> Matrix { return b; };
    const double l = a.rows() > 0 ? Eigen::JacobiSVD<Matrix>(a).singularValues()(0) : 0.0;
    const double u_max = std::max(box.lower.cwiseAbs().maxCoeff(), box.upper.cwiseAbs().maxCoeff());
    const double b_norm = b.size() > 0 ? Eigen::JacobiSVD<Matrix>(b).singularValues()(0) : 0.0;
    sys.lipschitz_L = l;
    sys.bound_C = std::max(l * state_radius + b_norm * u_max * std::sqrt(static_cast<double>(b.cols())), 1e-12);
    sys.control_box = box;
    return sys;
}

}  // namespace due
