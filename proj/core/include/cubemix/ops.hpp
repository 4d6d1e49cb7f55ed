#pragma once

#include <vector>

#include "cubemix/resample.hpp"
#include "cubemix/tape.hpp"

namespace cubemix {

enum class Axis { W = 0, H = 1, C = 2 };

// ---- elementwise ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b); // Hadamard
Var scale(Var a, double s);
Var relu(Var x);                 // subgradient at 0 is 0
Var prelu(Var x, Var slope);     // slope is per-channel, length C
Var abs(Var x);                  // subgradient at 0 is 0
Var square(Var x);

// ---- reductions ----
Var sum(Var x);   // scalar
Var mean(Var x);  // scalar

// ---- structured ----

/// Shared fully-connected map along one axis of a {W,H,C} tensor: for every
/// fiber along `axis`, out = weight^T * fiber + bias. weight is {d, d'},
/// bias {d'}; d must equal the tensor's extent along `axis`.
Var axis_linear(Var x, Axis axis, Var weight, Var bias);

/// Same-size cross-correlation with zero padding. kernels is {K,K,Cin,Cout}
/// with K in {1,3}; bias is {Cout}.
Var conv2d(Var x, Var kernels, Var bias);

/// Channel concatenation of {W,H,Ci} tensors sharing W,H.
Var concat_channels(const std::vector<Var>& xs);

/// Channels [begin, begin+count) as a {W,H,count} tensor.
Var channel_slice(Var x, int begin, int count);

Var resample(Var x, int target_w, int target_h, ResampleMethod method);

/// 2x2 average pooling, stride 2; truncates odd trailing rows/columns.
Var avg_pool2(Var x);

// tensor-level helpers shared by the data/eval paths
Tensor clamp01(const Tensor& x);

} // namespace cubemix
