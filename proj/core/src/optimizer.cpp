#include "cubemix/optimizer.hpp"

#include <cmath>

namespace cubemix {

void adam_step(ParamTable& params, const std::vector<Tensor>& grads, AdamState& state, double lr) {
    if (static_cast<int>(grads.size()) != params.count())
        throw DimensionError("adam_step: gradient list does not match the parameter table");
    if (state.m.empty()) {
        state.m.resize(grads.size());
        state.v.resize(grads.size());
        for (std::size_t i = 0; i < grads.size(); ++i) {
            state.m[i] = Tensor(params.value(static_cast<int>(i)).shape());
            state.v[i] = Tensor(params.value(static_cast<int>(i)).shape());
        }
    }
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        Tensor& p = params.value(static_cast<int>(i));
        const Tensor& g = grads[i];
        require_same_shape(p, g, "adam_step");
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

} // namespace cubemix
