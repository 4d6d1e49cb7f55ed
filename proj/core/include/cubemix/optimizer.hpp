#pragma once

#include <vector>

#include "cubemix/params.hpp"

namespace cubemix {

/// Adam moment estimates, one pair of tensors per parameter. Moments are
/// lazily shaped on the first step.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

/// Standard bias-corrected Adam update, in place over the table.
/// grads is indexed like the table.
void adam_step(ParamTable& params, const std::vector<Tensor>& grads, AdamState& state, double lr);

} // namespace cubemix
