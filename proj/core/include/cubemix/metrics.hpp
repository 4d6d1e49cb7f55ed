#pragma once

#include "cubemix/tensor.hpp"

namespace cubemix {

/// Peak signal-to-noise ratio, 10*log10(peak^2 / MSE); +infinity when the
/// images are identical.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

/// Mean structural similarity with the standard 11x11 Gaussian window
/// (sigma 1.5, K1 0.01, K2 0.03, peak 1), computed per channel over every
/// pixel where the full window fits, then averaged. Requires W,H >= 11.
double ssim(const Tensor& a, const Tensor& b);

} // namespace cubemix
