#pragma once

#include "cubemix/ops.hpp"

namespace cubemix {

/// Fixed-filter stand-in for a pretrained perceptual network: a frozen,
/// seeded random 3x3 convolution bank with two levels separated by 2x2
/// average pooling. The feature distance is the mean absolute difference of
/// the two feature stacks, averaged over levels.
struct PerceptualProxy {
    Tensor level1_w, level1_b; // 3x3, 3 -> 8
    Tensor level2_w, level2_b; // 3x3, 8 -> 8

    static const PerceptualProxy& instance();
};

/// Feature distance under the frozen bank; symmetric, zero for identical
/// inputs, differentiable through both arguments.
Var perceptual_proxy(Var pred, Var target);

double perceptual_proxy_value(const Tensor& pred, const Tensor& target);

struct LossParts {
    Var total;
    double l1 = 0.0;
    double perceptual = 0.0;
};

/// Training objective: mean absolute error plus lambda_p times the
/// perceptual proxy.
LossParts total_loss(Var pred, Var target, double lambda_p);

} // namespace cubemix
