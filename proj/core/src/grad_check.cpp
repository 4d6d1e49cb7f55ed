#include "cubemix/grad_check.hpp"

#include <cmath>
#include <sstream>

namespace cubemix {

std::string GradCheckReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " max_rel_error=" << max_rel_error;
    if (worst_input >= 0)
        os << " at input " << worst_input << "[" << worst_index << "] analytic=" << analytic
           << " numeric=" << numeric;
    return os.str();
}

namespace {

double eval(const ScalarFn& f, const std::vector<Tensor>& inputs) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const Tensor& t : inputs) vars.push_back(tape.leaf(t));
    Var root = f(tape, vars);
    if (root.value().numel() != 1) throw DimensionError("grad_check function must be scalar-valued");
    return root.value()[0];
}

} // namespace

GradCheckReport grad_check_many(const ScalarFn& f, const std::vector<Tensor>& inputs,
                                double eps, double tol) {
    // analytic gradients in one reverse pass
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const Tensor& t : inputs) {
        Tensor copy = t;
        copy.requires_grad = true;
        vars.push_back(tape.leaf(std::move(copy)));
    }
    Var root = f(tape, vars);
    if (root.value().numel() != 1) throw DimensionError("grad_check function must be scalar-valued");
    tape.backward(root.id);

    GradCheckReport report;
    std::vector<Tensor> work = inputs;
    std::vector<Tensor> analytic, numeric;
    double scale = 0.0; // dominant gradient magnitude across all inputs
    for (std::size_t which = 0; which < inputs.size(); ++which) {
        Tensor a = tape.adjoint(vars[which].id);
        Tensor n(a.shape());
        for (std::size_t i = 0; i < work[which].numel(); ++i) {
            double saved = work[which][i];
            work[which][i] = saved + eps;
            double fp = eval(f, work);
            work[which][i] = saved - eps;
            double fm = eval(f, work);
            work[which][i] = saved;
            n[i] = (fp - fm) / (2.0 * eps);
            scale = std::max(scale, std::abs(a[i]) + std::abs(n[i]));
        }
        analytic.push_back(std::move(a));
        numeric.push_back(std::move(n));
    }
    // components far below the dominant gradient scale are compared on an
    // absolute basis relative to that scale; otherwise the central-difference
    // roundoff floor (~ulp(f)/2eps) shows up as spurious relative error
    for (std::size_t which = 0; which < inputs.size(); ++which) {
        for (std::size_t i = 0; i < analytic[which].numel(); ++i) {
            double a = analytic[which][i];
            double n = numeric[which][i];
            double denom = std::max({std::abs(a) + std::abs(n), 1e-3 * scale, 1e-6});
            double rel = std::abs(a - n) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_input = static_cast<int>(which);
                report.worst_index = i;
                report.analytic = a;
                report.numeric = n;
            }
        }
    }
    report.pass = report.max_rel_error < tol;
    return report;
}

GradCheckReport grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                           double eps, double tol) {
    return grad_check_many(
        [&f](Tape& t, const std::vector<Var>& vs) { return f(t, vs[0]); }, {x}, eps, tol);
}

} // namespace cubemix
