#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cubemix/tape.hpp"

namespace cubemix {

struct GradCheckReport {
    bool pass = false;
    double max_rel_error = 0.0;
    // location of the worst element: which input tensor, which flat index
    int worst_input = -1;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;

    std::string summary() const;
};

/// Builds f's graph on a fresh tape from leaves for `inputs` (in order) and
/// returns the scalar root. Called repeatedly by grad_check_many.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Compares reverse-mode gradients of a scalar function against central
/// finite differences (f(x+eps*e) - f(x-eps*e)) / (2*eps), elementwise over
/// every input tensor. Relative error per component is
/// |a - n| / max(|a| + |n|, 1e-3 * G, 1e-6) with G the largest |a| + |n|
/// anywhere, so components buried under the central-difference roundoff
/// floor do not read as gradient defects.
GradCheckReport grad_check_many(const ScalarFn& f, const std::vector<Tensor>& inputs,
                                double eps, double tol);

/// Single-input form of the check.
GradCheckReport grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                           double eps, double tol);

} // namespace cubemix
