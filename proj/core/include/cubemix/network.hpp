#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cubemix/mixer.hpp"
#include "cubemix/params.hpp"

namespace cubemix {

enum class Ablation { full, d_real, d_imag, wo_ms, wo_ss, wo_lfe };
enum class SlicingMode { affine, polynomial };

std::string to_string(Ablation a);
std::string to_string(SlicingMode m);
Ablation ablation_from_string(const std::string& s);
SlicingMode slicing_from_string(const std::string& s);

struct PathSize {
    int w = 0;
    int h = 0;
};

struct NetworkConfig {
    /// Downsample factors of the three paths relative to full resolution.
    std::vector<double> path_scales = {0.25, 0.125, 0.0625};
    /// Absolute low-resolution processing sizes. When set they override the
    /// scales and decouple the mixer stage from the input resolution.
    std::vector<PathSize> path_sizes;
    int blocks_per_path = 4;
    int channels = 3;
    double hidden_ratio = 1.0;
    int lfe_kernel = 3;
    SlicingMode slicing_mode = SlicingMode::affine;

    void validate() const;

    /// Path sizes for a given full-resolution input; every resolved size must
    /// be at least 4x4 or a ConfigError is thrown.
    std::vector<PathSize> resolve_path_sizes(int input_w, int input_h) const;
};

struct PathParams {
    CubicMixerParams phi1;
    CubicMixerParams phi2;
    PathSize size;
};

struct LfeParams {
    int conv_w = -1, conv_b = -1;   // KxK, keeps channel count
    int prelu_slope = -1;
    int head_w = -1, head_b = -1;   // 1x1 squeeze to the slicing planes
};

/// Full parameter set plus the structural metadata a checkpoint must echo.
/// Path processing sizes are frozen at init; inference at other resolutions
/// reuses them (the mixer stage cost is resolution-independent).
struct NetworkParams {
    ParamTable table;
    NetworkConfig config;   // with path_sizes resolved
    Ablation ablation = Ablation::full;

    std::vector<PathParams> paths;
    LfeParams lfe;

    SpectralFeed feed() const;
    int concat_channels_in() const;  // 3 + 3*paths
    int head_out_channels() const;   // 6 slicing planes, or 3 for wo-ss
    int effective_lfe_kernel() const;
};

/// Builds and initializes the parameter set. Weights are
/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from the seeded PRNG, biases 0,
/// PReLU slopes 0.25. input_w/input_h size the paths when config.path_sizes
/// is empty.
NetworkParams init_network(const NetworkConfig& cfg, Ablation ablation, int input_w, int input_h,
                           std::uint64_t seed);

/// Exact scalar count of the parameter set.
std::size_t param_count(const NetworkParams& params);

/// The six full-resolution slicing planes, in the frozen channel order
/// (W_red, W_green, W_blue, b_red, b_green, b_blue).
struct SliceMapVars {
    Var w_red, w_green, w_blue;
    Var b_red, b_green, b_blue;
};

/// Forward cost split measured on the tape, in multiply-accumulate units.
/// The mixer stage is everything at path resolution (FFT, blocks, IFFT);
/// the full-resolution stage is the rest (resampling, convolutions, slicing).
struct ForwardStats {
    double mixer_flops = 0.0;
    double fullres_flops = 0.0;
};

/// Downsample to (floor(W*scale), floor(H*scale)) and run wave-frequency
/// processing there. Scaled sizes below 4 raise ConfigError.
Var scale_path(Var b, double scale, const CubicMixerParams& phi1, const CubicMixerParams& phi2,
               std::span<const Var> vars, SpectralFeed feed = SpectralFeed::real_imag);

/// All paths: downsample, WFP, bicubic upsample back to full resolution.
std::vector<Var> multiscale_forward(Var b, const NetworkParams& params,
                                    std::span<const Var> vars, ForwardStats* stats = nullptr);

/// Concatenates the raw image with the upsampled path outputs, applies the
/// local-feature convolution, PReLU, and the 1x1 squeeze head. Returns the
/// raw head output ({W,H,6}, or {W,H,3} under wo-ss).
Var local_feature_head(Var b, const std::vector<Var>& feature_maps, const NetworkParams& params,
                       std::span<const Var> vars);

/// Splits a 6-channel head output into named slicing planes.
SliceMapVars split_slice_maps(Var head_out);

/// Per-channel affine enhancement: out_c = W_c * B_c + b_c. No clamping;
/// values are clamped to [0,1] only at image export.
Var slice_apply(Var b, const SliceMapVars& m);

/// Quadratic variant: out_c = (W_c * B_c + b_c)^2.
Var slice_apply_poly(Var b, const SliceMapVars& m);

/// End-to-end forward pass for any ablation.
Var deblur_forward(Var b, const NetworkParams& params, std::span<const Var> vars,
                   ForwardStats* stats = nullptr);

/// Convenience: no-tape forward on a plain tensor (inference).
Tensor deblur_infer(const Tensor& b, const NetworkParams& params, ForwardStats* stats = nullptr);

} // namespace cubemix
