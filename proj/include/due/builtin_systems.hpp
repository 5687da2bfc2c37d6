#pragma once

#include "due/state_operator.hpp"

#include <string>
#include <vector>

namespace due {

/// Scalar test systems with one state and one control.
///   decay          f = -x            (L = 1)
///   integrator     f = u             (L = 0)
///   linear_forced  f = -x + u        (L = 1)
///   cubic          f = -x^3 + u      (L = 3, honest for |x| <= 1)
OdeSystem builtin_system(const std::string& name);

std::vector<std::string> builtin_system_names();

/// f = A x + B u with L = ||A||_2 and C from the given control box.
OdeSystem linear_system(const Matrix& a, const Matrix& b, const ControlBox& box, double state_radius);

}  // namespace due
