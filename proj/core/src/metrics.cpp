#include "cubemix/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace cubemix {

double psnr(const Tensor& a, const Tensor& b, double peak) {
    require_same_shape(a, b, "psnr");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin * kWin> ssim_window() {
    std::array<double, kWin * kWin> w{};
    double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
            double dx = i - kWin / 2, dy = j - kWin / 2;
            double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            w[static_cast<std::size_t>(i * kWin + j)] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return w;
}

} // namespace

double ssim(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "ssim");
    if (a.rank() != 3) throw DimensionError("ssim expects {W,H,C} tensors");
    int w = a.dim(0), h = a.dim(1), c = a.dim(2);
    if (w < kWin || h < kWin)
        throw DimensionError("ssim needs at least 11x11 images, got " + shape_str(a.shape()));

    static const std::array<double, kWin * kWin> win = ssim_window();
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    const int half = kWin / 2;

    double total = 0.0;
    std::size_t count = 0;
    for (int ch = 0; ch < c; ++ch) {
        for (int x = half; x < w - half; ++x) {
            for (int y = half; y < h - half; ++y) {
                double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
                for (int i = 0; i < kWin; ++i) {
                    for (int j = 0; j < kWin; ++j) {
                        double wt = win[static_cast<std::size_t>(i * kWin + j)];
                        double va = a.at(x + i - half, y + j - half, ch);
                        double vb = b.at(x + i - half, y + j - half, ch);
                        mu_a += wt * va;
                        mu_b += wt * vb;
                        aa += wt * va * va;
                        bb += wt * vb * vb;
                        ab += wt * va * vb;
                    }
                }
                double var_a = aa - mu_a * mu_a;
                double var_b = bb - mu_b * mu_b;
                double cov = ab - mu_a * mu_b;
                double s = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                           ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
                total += s;
                ++count;
            }
        }
    }
    return total / static_cast<double>(count);
}

} // namespace cubemix
