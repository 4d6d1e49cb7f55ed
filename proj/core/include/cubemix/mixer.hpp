#pragma once

#include <span>

#include "cubemix/common.hpp"
#include "cubemix/ops.hpp"
#include "cubemix/params.hpp"
#include "cubemix/spectral.hpp"

namespace cubemix {

/// The six weight matrices (plus biases) of one cubic-mixer layer, as indices
/// into a ParamTable. w1/w2 mix along W, w3/w4 along H, w5/w6 along C; each
/// pair is a two-layer MLP with a ReLU between and a residual connection.
struct MixerBlockParams {
    int w1 = -1, b1 = -1, w2 = -1, b2 = -1; // W axis: {W,Wh}, {Wh}, {Wh,W}, {W}
    int w3 = -1, b3 = -1, w4 = -1, b4 = -1; // H axis
    int w5 = -1, b5 = -1, w6 = -1, b6 = -1; // C axis
};

/// One mirror network: an ordered stack of mixer blocks over a fixed plane size.
struct CubicMixerParams {
    std::vector<MixerBlockParams> blocks;
};

/// Which spectral plane feeds each mirror network. The d-real and d-imag
/// ablations double one plane and discard the other.
enum class SpectralFeed { real_imag, double_real, double_imag };

/// Registers the parameters of one block sized for a {w,h,c} plane. Hidden
/// widths are round(extent * hidden_ratio), minimum 1. Weights are
/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)); biases start at zero.
MixerBlockParams init_mixer_block(ParamTable& table, const std::string& prefix, int w, int h,
                                  int c, double hidden_ratio, Rng& rng);

CubicMixerParams init_cubic_mixer(ParamTable& table, const std::string& prefix, int blocks,
                                  int w, int h, int c, double hidden_ratio, Rng& rng);

/// Scalar parameter count of one block from the closed-form
/// 2*W*Wh + 2*H*Hh + 2*C*Ch + (Wh + W + Hh + H + Ch + C).
std::size_t mixer_block_param_count(int w, int h, int c, double hidden_ratio);

int mixer_hidden_size(int extent, double hidden_ratio);

/// One cubic-mixer layer: residual two-layer MLP along W, then H, then C.
Var mixer_block(Var x, const MixerBlockParams& p, std::span<const Var> vars);

/// Sequential application of the blocks; an empty stack is the identity.
Var cubic_mixer(Var x, const CubicMixerParams& p, std::span<const Var> vars);

/// Wave-frequency processing: FFT the spatial input, run the real plane
/// through phi1 and the imaginary plane through phi2, recombine the outputs
/// as a complex tensor (phi1 -> real, phi2 -> imaginary), inverse-transform.
Var wfp_apply(Var b_low, const CubicMixerParams& phi1, const CubicMixerParams& phi2,
              std::span<const Var> vars, SpectralFeed feed = SpectralFeed::real_imag);

} // namespace cubemix
