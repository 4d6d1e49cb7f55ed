#include "cubemix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

namespace cubemix {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// iterative radix-2, in place; sign = -1 forward, +1 inverse; no scaling
void fft_pow2(std::vector<cd>& a, int sign) {
    int n = static_cast<int>(a.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(j)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * kPi / len;
        cd wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cd w(1.0);
            for (int k = 0; k < len / 2; ++k) {
                cd u = a[static_cast<std::size_t>(i + k)];
                cd v = a[static_cast<std::size_t>(i + k + len / 2)] * w;
                a[static_cast<std::size_t>(i + k)] = u + v;
                a[static_cast<std::size_t>(i + k + len / 2)] = u - v;
                w *= wlen;
            }
        }
    }
}

// O(n^2) fallback for non-power-of-two lengths
void dft_naive(std::vector<cd>& a, int sign) {
    int n = static_cast<int>(a.size());
    std::vector<cd> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cd acc(0.0);
        for (int j = 0; j < n; ++j) {
            double ang = sign * 2.0 * kPi * k * j / n;
            acc += a[static_cast<std::size_t>(j)] * cd(std::cos(ang), std::sin(ang));
        }
        out[static_cast<std::size_t>(k)] = acc;
    }
    a = std::move(out);
}

void transform_1d(std::vector<cd>& a, int sign) {
    if (is_pow2(static_cast<int>(a.size())))
        fft_pow2(a, sign);
    else
        dft_naive(a, sign);
}

// unnormalized 2D transform of one channel; sign = -1 forward, +1 inverse
void transform_2d(const Tensor& re_in, const Tensor& im_in, int channel, int sign,
                  Tensor& re_out, Tensor& im_out) {
    int w = re_in.dim(0), h = re_in.dim(1);
    std::vector<std::vector<cd>> rows(static_cast<std::size_t>(w));
    // along H for each column x
    for (int x = 0; x < w; ++x) {
        std::vector<cd> line(static_cast<std::size_t>(h));
        for (int y = 0; y < h; ++y)
            line[static_cast<std::size_t>(y)] = cd(re_in.at(x, y, channel), im_in.at(x, y, channel));
        transform_1d(line, sign);
        rows[static_cast<std::size_t>(x)] = std::move(line);
    }
    // along W for each row v
    std::vector<cd> line(static_cast<std::size_t>(w));
    for (int v = 0; v < h; ++v) {
        for (int x = 0; x < w; ++x) line[static_cast<std::size_t>(x)] = rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(v)];
        transform_1d(line, sign);
        for (int u = 0; u < w; ++u) {
            re_out.at(u, v, channel) = line[static_cast<std::size_t>(u)].real();
            im_out.at(u, v, channel) = line[static_cast<std::size_t>(u)].imag();
        }
    }
}

void transform_all(const Tensor& re_in, const Tensor& im_in, int sign, Tensor& re_out,
                   Tensor& im_out) {
    for (int c = 0; c < re_in.dim(2); ++c) transform_2d(re_in, im_in, c, sign, re_out, im_out);
}

} // namespace

double fft2_flops(int w, int h, int channels) {
    auto cost_1d = [](int n) {
        return is_pow2(n) ? static_cast<double>(n) * std::max(1.0, std::log2(static_cast<double>(n)))
                          : static_cast<double>(n) * n;
    };
    return channels * (h * cost_1d(w) * 4.0 + w * cost_1d(h) * 4.0);
}

SpectralPlanes fft2(const Tensor& x) {
    if (x.rank() != 3) throw DimensionError("fft2 expects a {W,H,C} tensor");
    Tensor zeros(x.shape());
    SpectralPlanes s{Tensor(x.shape()), Tensor(x.shape())};
    transform_all(x, zeros, -1, s.real, s.imag);
    return s;
}

Tensor ifft2_real(const SpectralPlanes& s) {
    require_same_shape(s.real, s.imag, "ifft2_real planes");
    Tensor re(s.real.shape()), im(s.real.shape());
    transform_all(s.real, s.imag, +1, re, im);
    double norm = 1.0 / (static_cast<double>(s.real.dim(0)) * s.real.dim(1));
    Tensor out(s.real.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = re[i] * norm;
    return out;
}

SpectralVars fft2(Var x) {
    Tape& t = *x.tape;
    const Tensor& vx = x.value();
    SpectralPlanes s = fft2(vx);
    t.add_flops(fft2_flops(vx.dim(0), vx.dim(1), vx.dim(2)));
    VarId xid = x.id;
    // both planes are outputs of the same linear map; each contributes the
    // real part of the unnormalized inverse transform of its cotangent
    Var real = t.record(std::move(s.real), {xid}, [xid](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        Tensor zeros(g.shape());
        Tensor re(g.shape()), im(g.shape());
        transform_all(g, zeros, +1, re, im);
        tp.accumulate(xid, re);
    });
    Var imag = t.record(std::move(s.imag), {xid}, [xid](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        Tensor zeros(g.shape());
        Tensor re(g.shape()), im(g.shape());
        transform_all(zeros, g, +1, re, im);
        tp.accumulate(xid, re);
    });
    return {real, imag};
}

Var ifft2_real(SpectralVars s) {
    Tape& t = *s.real.tape;
    SpectralPlanes planes{s.real.value(), s.imag.value()};
    Tensor out = ifft2_real(planes);
    t.add_flops(fft2_flops(out.dim(0), out.dim(1), out.dim(2)));
    VarId rid = s.real.id, iid = s.imag.id;
    return t.record(std::move(out), {rid, iid}, [rid, iid](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        double norm = 1.0 / (static_cast<double>(g.dim(0)) * g.dim(1));
        Tensor zeros(g.shape());
        Tensor re(g.shape()), im(g.shape());
        transform_all(g, zeros, -1, re, im);
        Tensor dr(g.shape()), di(g.shape());
        for (std::size_t i = 0; i < g.numel(); ++i) {
            dr[i] = re[i] * norm;
            di[i] = im[i] * norm;
        }
        tp.accumulate(rid, dr);
        tp.accumulate(iid, di);
    });
}

Tensor phase_spectrum(const SpectralPlanes& s) {
    require_same_shape(s.real, s.imag, "phase_spectrum planes");
    Tensor out(s.real.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) {
        double re = s.real[i], im = s.imag[i];
        if (re == 0.0 && im == 0.0) {
            out[i] = 0.0;
        } else {
            double p = std::atan2(im, re);
            if (p <= -kPi) p = kPi; // range is (-pi, pi]
            out[i] = p;
        }
    }
    return out;
}

Tensor render_spectrum(const SpectralPlanes& s, double lo, double hi) {
    require_same_shape(s.real, s.imag, "render_spectrum planes");
    int w = s.real.dim(0), h = s.real.dim(1), c = s.real.dim(2);
    Tensor out({w, h, c});
    for (int ch = 0; ch < c; ++ch) {
        double mn = std::numeric_limits<double>::infinity();
        double mx = -std::numeric_limits<double>::infinity();
        Tensor logmag({w, h, 1});
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) {
                double re = s.real.at(x, y, ch), im = s.imag.at(x, y, ch);
                double v = std::log1p(std::sqrt(re * re + im * im));
                logmag.at(x, y, 0) = v;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
        }
        double span = mx - mn;
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) {
                double v = span > 0.0 ? (logmag.at(x, y, 0) - mn) / span : 0.0;
                // fftshift: DC lands at the center pixel
                int sx = (x + w / 2) % w;
                int sy = (y + h / 2) % h;
                out.at(sx, sy, ch) = lo + v * (hi - lo);
            }
        }
    }
    return out;
}

} // namespace cubemix
