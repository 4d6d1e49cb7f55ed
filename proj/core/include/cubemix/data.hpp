#pragma once

#include <cstdint>
#include <vector>

#include "cubemix/tensor.hpp"

namespace cubemix {

enum class BlurKind { gaussian, linear_motion };

/// A synthetic blur: an explicit normalized convolution kernel.
struct BlurSpec {
    BlurKind kind = BlurKind::gaussian;
    double sigma = 2.0;     // gaussian
    double length = 9.0;    // linear motion, in pixels
    double angle = 0.0;     // linear motion, radians

    /// The realized kernel: entries >= 0, sum 1.
    Tensor kernel() const; // {K,K,1}
};

/// Per-channel 2D convolution of a [0,1] image with the realized blur kernel,
/// edge-clamped; the output stays in [0,1].
Tensor synth_blur(const Tensor& sharp, const BlurSpec& spec);

struct Pair {
    Tensor blurry;
    Tensor sharp;
    BlurSpec spec;
};

struct Dataset {
    std::vector<Pair> train;
    std::vector<Pair> holdout;
    std::uint64_t content_hash = 0; // FNV-1a over all pixel bytes
};

/// Procedural sharp test images: smooth gradients and sinusoids layered with
/// solid rectangles and disks, so blurring destroys measurable detail.
Tensor synthetic_sharp_image(int w, int h, Rng& rng);

/// Deterministic pairing of cropped patches with blur specs drawn from the
/// Gaussian sigma [1,3] / motion length [5,15] family, split into train and
/// held-out subsets. Identical seeds produce bit-identical datasets.
Dataset make_dataset(const std::vector<Tensor>& source_images, int patch_size, int pair_count,
                     int holdout_count, std::uint64_t seed);

/// make_dataset on procedurally generated sources.
Dataset make_synthetic_dataset(int patch_size, int pair_count, int holdout_count,
                               std::uint64_t seed);

std::uint64_t dataset_hash(const Dataset& d);

/// Total variation (sum of absolute forward differences), used by tests and
/// diagnostics.
double total_variation(const Tensor& x);

} // namespace cubemix
