#pragma once

#include <string>

#include "cubemix/tensor.hpp"

namespace cubemix {

/// Reads a binary PPM (P6, maxval 255) into a {W,H,3} tensor scaled to [0,1].
Tensor image_read(const std::string& path);

/// Writes a {W,H,3} tensor as binary PPM with the header
/// "P6\n<w> <h>\n255\n". Values are clamped to [0,1] and quantized
/// round-half-up to 8 bits.
void image_write(const std::string& path, const Tensor& image);

/// The quantization used by image_write, exposed for exact-roundtrip tests.
unsigned char quantize8(double v);

} // namespace cubemix
