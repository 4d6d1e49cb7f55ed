#include "cubemix/resample.hpp"

#include <algorithm>
#include <cmath>

namespace cubemix {

namespace {

struct Taps {
    int base;          // index of the first tap (before clamping)
    double w[4];       // up to 4 weights; bilinear uses the first 2
    int count;
};

// Catmull-Rom / Keys cubic with a = -0.5, evaluated at the four integer
// offsets around fractional position t in [0,1).
Taps cubic_taps(double src, int n) {
    const double a = -0.5;
    int i0 = static_cast<int>(std::floor(src));
    double t = src - i0;
    Taps taps;
    taps.base = i0 - 1;
    taps.count = 4;
    double s[4] = {1.0 + t, t, 1.0 - t, 2.0 - t};
    for (int k = 0; k < 4; ++k) {
        double u = std::abs(s[k]);
        double w;
        if (u <= 1.0)
            w = (a + 2.0) * u * u * u - (a + 3.0) * u * u + 1.0;
        else
            w = a * u * u * u - 5.0 * a * u * u + 8.0 * a * u - 4.0 * a;
        taps.w[k] = w;
    }
    double sum = taps.w[0] + taps.w[1] + taps.w[2] + taps.w[3];
    for (int k = 0; k < 4; ++k) taps.w[k] /= sum;
    (void)n;
    return taps;
}

Taps linear_taps(double src) {
    int i0 = static_cast<int>(std::floor(src));
    double t = src - i0;
    Taps taps;
    taps.base = i0;
    taps.count = 2;
    taps.w[0] = 1.0 - t;
    taps.w[1] = t;
    taps.w[2] = taps.w[3] = 0.0;
    return taps;
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

std::vector<Taps> plan_axis(int n_in, int n_out, ResampleMethod method) {
    std::vector<Taps> plan(static_cast<std::size_t>(n_out));
    double step = static_cast<double>(n_in) / static_cast<double>(n_out);
    for (int i = 0; i < n_out; ++i) {
        double src = (i + 0.5) * step - 0.5;
        plan[static_cast<std::size_t>(i)] =
            method == ResampleMethod::bicubic ? cubic_taps(src, n_in) : linear_taps(src);
    }
    return plan;
}

// one separable pass along W; H and C are carried through
Tensor pass_w(const Tensor& x, const std::vector<Taps>& plan, bool adjoint, int out_w) {
    int in_w = x.dim(0), h = x.dim(1), c = x.dim(2);
    if (adjoint) {
        Tensor out({out_w, h, c});
        for (int i = 0; i < in_w; ++i) {
            const Taps& t = plan[static_cast<std::size_t>(i)];
            for (int k = 0; k < t.count; ++k) {
                int si = clamp_index(t.base + k, out_w);
                for (int y = 0; y < h; ++y)
                    for (int ch = 0; ch < c; ++ch) out.at(si, y, ch) += t.w[k] * x.at(i, y, ch);
            }
        }
        return out;
    }
    Tensor out({out_w, h, c});
    for (int i = 0; i < out_w; ++i) {
        const Taps& t = plan[static_cast<std::size_t>(i)];
        for (int y = 0; y < h; ++y) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int k = 0; k < t.count; ++k)
                    acc += t.w[k] * x.at(clamp_index(t.base + k, in_w), y, ch);
                out.at(i, y, ch) = acc;
            }
        }
    }
    return out;
}

Tensor pass_h(const Tensor& x, const std::vector<Taps>& plan, bool adjoint, int out_h) {
    int w = x.dim(0), in_h = x.dim(1), c = x.dim(2);
    if (adjoint) {
        Tensor out({w, out_h, c});
        for (int j = 0; j < in_h; ++j) {
            const Taps& t = plan[static_cast<std::size_t>(j)];
            for (int k = 0; k < t.count; ++k) {
                int sj = clamp_index(t.base + k, out_h);
                for (int x0 = 0; x0 < w; ++x0)
                    for (int ch = 0; ch < c; ++ch) out.at(x0, sj, ch) += t.w[k] * x.at(x0, j, ch);
            }
        }
        return out;
    }
    Tensor out({w, out_h, c});
    for (int x0 = 0; x0 < w; ++x0) {
        for (int j = 0; j < out_h; ++j) {
            const Taps& t = plan[static_cast<std::size_t>(j)];
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int k = 0; k < t.count; ++k)
                    acc += t.w[k] * x.at(x0, clamp_index(t.base + k, in_h), ch);
                out.at(x0, j, ch) = acc;
            }
        }
    }
    return out;
}

} // namespace

Tensor resample(const Tensor& x, int target_w, int target_h, ResampleMethod method) {
    if (x.rank() != 3) throw DimensionError("resample expects a {W,H,C} tensor");
    if (target_w < 1 || target_h < 1)
        throw ValidationError("resample target must be positive, got " +
                              std::to_string(target_w) + "x" + std::to_string(target_h));
    if (target_w == x.dim(0) && target_h == x.dim(1)) return x;
    auto wplan = plan_axis(x.dim(0), target_w, method);
    Tensor mid = pass_w(x, wplan, false, target_w);
    auto hplan = plan_axis(x.dim(1), target_h, method);
    return pass_h(mid, hplan, false, target_h);
}

Tensor resample_adjoint(const Tensor& grad, int src_w, int src_h, ResampleMethod method) {
    if (grad.rank() != 3) throw DimensionError("resample_adjoint expects a {W,H,C} tensor");
    if (grad.dim(0) == src_w && grad.dim(1) == src_h) return grad;
    // reverse of forward: undo the H pass, then the W pass
    auto hplan = plan_axis(src_h, grad.dim(1), method);
    Tensor mid = pass_h(grad, hplan, true, src_h);
    auto wplan = plan_axis(src_w, grad.dim(0), method);
    return pass_w(mid, wplan, true, src_w);
}

double resample_flops(int src_w, int src_h, int target_w, int target_h, int channels,
                      ResampleMethod method) {
    double taps = method == ResampleMethod::bicubic ? 4.0 : 2.0;
    if (target_w == src_w && target_h == src_h) return 0.0;
    double pass1 = static_cast<double>(target_w) * src_h * channels * taps;
    double pass2 = static_cast<double>(target_w) * target_h * channels * taps;
    return pass1 + pass2;
}

} // namespace cubemix
