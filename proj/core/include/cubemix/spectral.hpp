#pragma once

#include "cubemix/ops.hpp"
#include "cubemix/tensor.hpp"

namespace cubemix {

/// Real and imaginary Fourier coefficient planes of a {W,H,C} image,
/// per channel, indexed by frequency bin.
struct SpectralPlanes {
    Tensor real;
    Tensor imag;
};

/// Tape handles to the two planes.
struct SpectralVars {
    Var real;
    Var imag;
};

// Convention: unnormalized forward DFT, 1/(W*H) on the inverse.

/// Per-channel 2D forward DFT of a real tensor.
SpectralPlanes fft2(const Tensor& x);

/// Per-channel inverse DFT; returns the real part of the complex result.
/// The imaginary residual is discarded: after independent processing of the
/// two planes the combined tensor is generally not Hermitian, and the output
/// image is real.
Tensor ifft2_real(const SpectralPlanes& s);

// differentiable forms
SpectralVars fft2(Var x);
Var ifft2_real(SpectralVars s);

/// Elementwise phase angle atan2(imag, real) in (-pi, pi]; 0 where both are 0.
Tensor phase_spectrum(const SpectralPlanes& s);

/// Log-magnitude rendering log(1 + sqrt(real^2 + imag^2)), rescaled affinely
/// per channel to [lo, hi] with the DC bin shifted to the image center.
/// A constant-magnitude channel renders as all-lo.
Tensor render_spectrum(const SpectralPlanes& s, double lo = 0.0, double hi = 10.0);

/// MAC count of one per-channel 2D transform, for the FLOP ledger.
double fft2_flops(int w, int h, int channels);

} // namespace cubemix
