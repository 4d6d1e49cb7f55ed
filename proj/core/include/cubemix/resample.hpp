#pragma once

#include "cubemix/tensor.hpp"

namespace cubemix {

enum class ResampleMethod { bicubic, bilinear };

/// Separable per-channel resampling of a {W,H,C} tensor to (target_w, target_h).
/// Source coordinates use half-pixel centers: src = (dst + 0.5) * (in/out) - 0.5,
/// with edge-clamped taps. Bicubic uses the Catmull-Rom kernel (a = -0.5);
/// tap weights are renormalized so constants are preserved exactly.
/// target == source is an exact copy.
Tensor resample(const Tensor& x, int target_w, int target_h, ResampleMethod method);

/// Adjoint of resample as a linear map: scatters `grad` (shaped {target_w,
/// target_h, C}) back onto the source grid with the same tap weights.
Tensor resample_adjoint(const Tensor& grad, int src_w, int src_h, ResampleMethod method);

/// Multiply-accumulate count of one resample call, for the FLOP ledger.
double resample_flops(int src_w, int src_h, int target_w, int target_h, int channels,
                      ResampleMethod method);

} // namespace cubemix
