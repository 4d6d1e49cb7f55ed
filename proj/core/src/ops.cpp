#include "cubemix/ops.hpp"

#include <algorithm>
#include <cmath>

namespace cubemix {

namespace {

Tape& same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw ValidationError("operands live on different tapes");
    return *a.tape;
}

Tensor map2(const Tensor& a, const Tensor& b, double (*f)(double, double)) {
    require_same_shape(a, b, "elementwise op");
    Tensor out(a.shape());
    const double *pa = a.data(), *pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < out.numel(); ++i) po[i] = f(pa[i], pb[i]);
    return out;
}

void accumulate_scaled(Tape& t, VarId target, const Tensor& g, double s) {
    Tensor d(g.shape());
    const double* pg = g.data();
    double* pd = d.data();
    for (std::size_t i = 0; i < d.numel(); ++i) pd[i] = s * pg[i];
    t.accumulate(target, d);
}

} // namespace

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    Tensor out = map2(a.value(), b.value(), [](double x, double y) { return x + y; });
    VarId pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        tp.accumulate(pa, g);
        tp.accumulate(pb, g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    Tensor out = map2(a.value(), b.value(), [](double x, double y) { return x - y; });
    VarId pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        tp.accumulate(pa, g);
        accumulate_scaled(tp, pb, g, -1.0);
    });
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    Tensor out = map2(a.value(), b.value(), [](double x, double y) { return x * y; });
    t.add_flops(static_cast<double>(out.numel()));
    VarId pa = a.id, pb = b.id;
    return t.record(std::move(out), {pa, pb}, [pa, pb](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& va = tp.value(pa);
        const Tensor& vb = tp.value(pb);
        Tensor da(g.shape()), db(g.shape());
        for (std::size_t i = 0; i < g.numel(); ++i) {
            da[i] = g[i] * vb[i];
            db[i] = g[i] * va[i];
        }
        tp.accumulate(pa, da);
        tp.accumulate(pb, db);
    });
}

Var scale(Var a, double s) {
    Tape& t = *a.tape;
    Tensor out(a.value().shape());
    const double* pa = a.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = s * pa[i];
    t.add_flops(static_cast<double>(out.numel()));
    VarId pa_id = a.id;
    return t.record(std::move(out), {pa_id}, [pa_id, s](Tape& tp, VarId self) {
        accumulate_scaled(tp, pa_id, tp.adjoint(self), s);
    });
}

Var relu(Var x) {
    Tape& t = *x.tape;
    Tensor out(x.value().shape());
    const double* px = x.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = px[i] > 0.0 ? px[i] : 0.0;
    VarId xid = x.id;
    return t.record(std::move(out), {xid}, [xid](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& v = tp.value(xid);
        Tensor d(g.shape());
        for (std::size_t i = 0; i < g.numel(); ++i) d[i] = v[i] > 0.0 ? g[i] : 0.0;
        tp.accumulate(xid, d);
    });
}

Var prelu(Var x, Var slope) {
    Tape& t = same_tape(x, slope);
    const Tensor& vx = x.value();
    const Tensor& vs = slope.value();
    if (vx.rank() != 3) throw DimensionError("prelu expects a {W,H,C} tensor");
    if (vs.rank() != 1 || vs.dim(0) != vx.dim(2))
        throw DimensionError("prelu slope length " + shape_str(vs.shape()) +
                             " does not match channels " + std::to_string(vx.dim(2)));
    int c = vx.dim(2);
    Tensor out(vx.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) {
        double v = vx[i];
        out[i] = v >= 0.0 ? v : vs[i % static_cast<std::size_t>(c)] * v;
    }
    t.add_flops(static_cast<double>(out.numel()));
    VarId xid = x.id, sid = slope.id;
    return t.record(std::move(out), {xid, sid}, [xid, sid, c](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& v = tp.value(xid);
        const Tensor& s = tp.value(sid);
        Tensor dx(g.shape());
        Tensor ds(s.shape());
        for (std::size_t i = 0; i < g.numel(); ++i) {
            std::size_t ch = i % static_cast<std::size_t>(c);
            if (v[i] >= 0.0) {
                dx[i] = g[i];
            } else {
                dx[i] = s[ch] * g[i];
                ds[ch] += v[i] * g[i];
            }
        }
        tp.accumulate(xid, dx);
        tp.accumulate(sid, ds);
    });
}

Var abs(Var x) {
    Tape& t = *x.tape;
    Tensor out(x.value().shape());
    const double* px = x.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::abs(px[i]);
    VarId xid = x.id;
    return t.record(std::move(out), {xid}, [xid](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& v = tp.value(xid);
        Tensor d(g.shape());
        for (std::size_t i = 0; i < g.numel(); ++i)
            d[i] = v[i] > 0.0 ? g[i] : (v[i] < 0.0 ? -g[i] : 0.0);
        tp.accumulate(xid, d);
    });
}

Var square(Var x) { return mul(x, x); }

Var sum(Var x) {
    Tape& t = *x.tape;
    VarId xid = x.id;
    Tensor out = Tensor::scalar(x.value().sum());
    return t.record(std::move(out), {xid}, [xid](Tape& tp, VarId self) {
        double g = tp.adjoint(self)[0];
        tp.accumulate(xid, Tensor::full(tp.value(xid).shape(), g));
    });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().numel())); }

Var axis_linear(Var x, Axis axis, Var weight, Var bias) {
    Tape& t = *x.tape;
    const Tensor& vx = x.value();
    const Tensor& vw = weight.value();
    const Tensor& vb = bias.value();
    if (vx.rank() != 3) throw DimensionError("axis_linear expects a {W,H,C} tensor");
    if (vw.rank() != 2) throw DimensionError("axis_linear weight must be a matrix");
    if (!vw.all_finite() || !vb.all_finite())
        throw ValidationError("axis_linear weights must be finite");
    int ax = static_cast<int>(axis);
    int d = vx.dim(ax);
    int d_out = vw.dim(1);
    if (vw.dim(0) != d)
        throw DimensionError("axis_linear weight rows " + std::to_string(vw.dim(0)) +
                             " do not match axis extent " + std::to_string(d));
    if (vb.rank() != 1 || vb.dim(0) != d_out)
        throw DimensionError("axis_linear bias length does not match weight columns");

    std::vector<int> out_shape = vx.shape();
    out_shape[static_cast<std::size_t>(ax)] = d_out;
    Tensor out(out_shape);

    // fiber strides in the flat {W,H,C} layout
    const int W = vx.dim(0), H = vx.dim(1), C = vx.dim(2);
    auto stride = [&](int a, const Tensor& tt) {
        switch (a) {
            case 0: return tt.dim(1) * tt.dim(2);
            case 1: return tt.dim(2);
            default: return 1;
        }
    };
    int sx = stride(ax, vx), so = stride(ax, out);
    // iterate over the two non-axis dimensions
    int n0, n1;
    if (ax == 0) { n0 = H; n1 = C; }
    else if (ax == 1) { n0 = W; n1 = C; }
    else { n0 = W; n1 = H; }
    auto base_index = [&](int i0, int i1, const Tensor& tt) -> std::size_t {
        switch (ax) {
            case 0: return static_cast<std::size_t>(i0 * tt.dim(2) + i1);
            case 1: return static_cast<std::size_t>(i0 * tt.dim(1) * tt.dim(2) + i1);
            default: return static_cast<std::size_t>((i0 * tt.dim(1) + i1) * tt.dim(2));
        }
    };

    const double* px = vx.data();
    const double* pw = vw.data();
    const double* pb = vb.data();
    double* po = out.data();
    for (int i0 = 0; i0 < n0; ++i0) {
        for (int i1 = 0; i1 < n1; ++i1) {
            std::size_t bx = base_index(i0, i1, vx);
            std::size_t bo = base_index(i0, i1, out);
            for (int j2 = 0; j2 < d_out; ++j2) {
                double acc = pb[j2];
                for (int j = 0; j < d; ++j)
                    acc += pw[j * d_out + j2] * px[bx + static_cast<std::size_t>(j) * sx];
                po[bo + static_cast<std::size_t>(j2) * so] = acc;
            }
        }
    }
    t.add_flops(static_cast<double>(n0) * n1 * d * d_out);

    VarId xid = x.id, wid = weight.id, bid = bias.id;
    return t.record(std::move(out), {xid, wid, bid},
                    [xid, wid, bid, ax, d, d_out](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& vx2 = tp.value(xid);
        const Tensor& vw2 = tp.value(wid);
        Tensor dx(vx2.shape());
        Tensor dw(vw2.shape());
        Tensor db(tp.value(bid).shape());

        auto stride = [&](int a, const Tensor& tt) {
            switch (a) {
                case 0: return tt.dim(1) * tt.dim(2);
                case 1: return tt.dim(2);
                default: return 1;
            }
        };
        int sx = stride(ax, vx2), sg = stride(ax, g);
        int n0, n1;
        if (ax == 0) { n0 = vx2.dim(1); n1 = vx2.dim(2); }
        else if (ax == 1) { n0 = vx2.dim(0); n1 = vx2.dim(2); }
        else { n0 = vx2.dim(0); n1 = vx2.dim(1); }
        auto base_index = [&](int i0, int i1, const Tensor& tt) -> std::size_t {
            switch (ax) {
                case 0: return static_cast<std::size_t>(i0 * tt.dim(2) + i1);
                case 1: return static_cast<std::size_t>(i0 * tt.dim(1) * tt.dim(2) + i1);
                default: return static_cast<std::size_t>((i0 * tt.dim(1) + i1) * tt.dim(2));
            }
        };
        const double* px = vx2.data();
        const double* pw = vw2.data();
        const double* pg = g.data();
        for (int i0 = 0; i0 < n0; ++i0) {
            for (int i1 = 0; i1 < n1; ++i1) {
                std::size_t bx = base_index(i0, i1, vx2);
                std::size_t bg = base_index(i0, i1, g);
                for (int j2 = 0; j2 < d_out; ++j2) {
                    double gv = pg[bg + static_cast<std::size_t>(j2) * sg];
                    db[static_cast<std::size_t>(j2)] += gv;
                    for (int j = 0; j < d; ++j) {
                        double xv = px[bx + static_cast<std::size_t>(j) * sx];
                        dx[bx + static_cast<std::size_t>(j) * sx] += pw[j * d_out + j2] * gv;
                        dw[static_cast<std::size_t>(j * d_out + j2)] += xv * gv;
                    }
                }
            }
        }
        tp.accumulate(xid, dx);
        tp.accumulate(wid, dw);
        tp.accumulate(bid, db);
    });
}

Var conv2d(Var x, Var kernels, Var bias) {
    Tape& t = *x.tape;
    const Tensor& vx = x.value();
    const Tensor& vk = kernels.value();
    const Tensor& vb = bias.value();
    if (vx.rank() != 3) throw DimensionError("conv2d expects a {W,H,C} input");
    if (vk.rank() != 4) throw DimensionError("conv2d kernels must be {K,K,Cin,Cout}");
    int K = vk.dim(0);
    if (vk.dim(1) != K) throw DimensionError("conv2d kernels must be square");
    if (K != 1 && K != 3) throw ValidationError("conv2d supports K in {1,3}, got " + std::to_string(K));
    int W = vx.dim(0), H = vx.dim(1), Cin = vx.dim(2), Cout = vk.dim(3);
    if (vk.dim(2) != Cin)
        throw DimensionError("conv2d kernel Cin " + std::to_string(vk.dim(2)) +
                             " does not match input channels " + std::to_string(Cin));
    if (vb.rank() != 1 || vb.dim(0) != Cout)
        throw DimensionError("conv2d bias length does not match Cout");

    int pad = (K - 1) / 2;
    Tensor out({W, H, Cout});
    const double* px = vx.data();
    const double* pk = vk.data();
    double* po = out.data();
    for (int ox = 0; ox < W; ++ox) {
        for (int oy = 0; oy < H; ++oy) {
            double* orow = po + static_cast<std::size_t>((ox * H + oy) * Cout);
            for (int co = 0; co < Cout; ++co) orow[co] = vb[static_cast<std::size_t>(co)];
            for (int kx = 0; kx < K; ++kx) {
                int ix = ox + kx - pad;
                if (ix < 0 || ix >= W) continue;
                for (int ky = 0; ky < K; ++ky) {
                    int iy = oy + ky - pad;
                    if (iy < 0 || iy >= H) continue;
                    const double* irow = px + static_cast<std::size_t>((ix * H + iy) * Cin);
                    const double* krow = pk + static_cast<std::size_t>(((kx * K + ky) * Cin) * Cout);
                    for (int ci = 0; ci < Cin; ++ci) {
                        double xv = irow[ci];
                        const double* kk = krow + static_cast<std::size_t>(ci) * Cout;
                        for (int co = 0; co < Cout; ++co) orow[co] += xv * kk[co];
                    }
                }
            }
        }
    }
    t.add_flops(static_cast<double>(W) * H * K * K * Cin * Cout);

    VarId xid = x.id, kid = kernels.id, bid = bias.id;
    return t.record(std::move(out), {xid, kid, bid},
                    [xid, kid, bid, K, pad](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& vx2 = tp.value(xid);
        const Tensor& vk2 = tp.value(kid);
        int W = vx2.dim(0), H = vx2.dim(1), Cin = vx2.dim(2), Cout = vk2.dim(3);
        Tensor dx(vx2.shape());
        Tensor dk(vk2.shape());
        Tensor db(tp.value(bid).shape());
        const double* px = vx2.data();
        const double* pk = vk2.data();
        const double* pg = g.data();
        for (int ox = 0; ox < W; ++ox) {
            for (int oy = 0; oy < H; ++oy) {
                const double* grow = pg + static_cast<std::size_t>((ox * H + oy) * Cout);
                for (int co = 0; co < Cout; ++co) db[static_cast<std::size_t>(co)] += grow[co];
                for (int kx = 0; kx < K; ++kx) {
                    int ix = ox + kx - pad;
                    if (ix < 0 || ix >= W) continue;
                    for (int ky = 0; ky < K; ++ky) {
                        int iy = oy + ky - pad;
                        if (iy < 0 || iy >= H) continue;
                        const double* irow = px + static_cast<std::size_t>((ix * H + iy) * Cin);
                        double* dxrow = dx.data() + static_cast<std::size_t>((ix * H + iy) * Cin);
                        std::size_t kbase = static_cast<std::size_t>(((kx * K + ky) * Cin) * Cout);
                        for (int ci = 0; ci < Cin; ++ci) {
                            const double* kk = pk + kbase + static_cast<std::size_t>(ci) * Cout;
                            double* dkk = dk.data() + kbase + static_cast<std::size_t>(ci) * Cout;
                            double xv = irow[ci];
                            double acc = 0.0;
                            for (int co = 0; co < Cout; ++co) {
                                acc += kk[co] * grow[co];
                                dkk[co] += xv * grow[co];
                            }
                            dxrow[ci] += acc;
                        }
                    }
                }
            }
        }
        tp.accumulate(xid, dx);
        tp.accumulate(kid, dk);
        tp.accumulate(bid, db);
    });
}

Var concat_channels(const std::vector<Var>& xs) {
    if (xs.empty()) throw DimensionError("concat_channels needs at least one input");
    Tape& t = *xs[0].tape;
    int W = xs[0].value().dim(0), H = xs[0].value().dim(1);
    int total_c = 0;
    std::vector<VarId> parents;
    std::vector<int> channels;
    for (const Var& v : xs) {
        const Tensor& tv = v.value();
        if (tv.rank() != 3) throw DimensionError("concat_channels expects {W,H,C} tensors");
        if (tv.dim(0) != W || tv.dim(1) != H)
            throw DimensionError("concat_channels spatial mismatch: " + shape_str(tv.shape()));
        parents.push_back(v.id);
        channels.push_back(tv.dim(2));
        total_c += tv.dim(2);
    }
    Tensor out({W, H, total_c});
    int offset = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const Tensor& tv = xs[k].value();
        int c = channels[k];
        for (int x0 = 0; x0 < W; ++x0)
            for (int y = 0; y < H; ++y)
                for (int ch = 0; ch < c; ++ch) out.at(x0, y, offset + ch) = tv.at(x0, y, ch);
        offset += c;
    }
    return t.record(std::move(out), parents, [parents, channels](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        int W = g.dim(0), H = g.dim(1);
        int offset = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) {
            int c = channels[k];
            Tensor d({W, H, c});
            for (int x0 = 0; x0 < W; ++x0)
                for (int y = 0; y < H; ++y)
                    for (int ch = 0; ch < c; ++ch) d.at(x0, y, ch) = g.at(x0, y, offset + ch);
            tp.accumulate(parents[k], d);
            offset += c;
        }
    });
}

Var channel_slice(Var x, int begin, int count) {
    Tape& t = *x.tape;
    const Tensor& vx = x.value();
    if (vx.rank() != 3) throw DimensionError("channel_slice expects a {W,H,C} tensor");
    int W = vx.dim(0), H = vx.dim(1), C = vx.dim(2);
    if (begin < 0 || count < 1 || begin + count > C)
        throw DimensionError("channel_slice range out of bounds");
    Tensor out({W, H, count});
    for (int x0 = 0; x0 < W; ++x0)
        for (int y = 0; y < H; ++y)
            for (int ch = 0; ch < count; ++ch) out.at(x0, y, ch) = vx.at(x0, y, begin + ch);
    VarId xid = x.id;
    return t.record(std::move(out), {xid}, [xid, begin, count](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& vx2 = tp.value(xid);
        Tensor d(vx2.shape());
        int W = vx2.dim(0), H = vx2.dim(1);
        for (int x0 = 0; x0 < W; ++x0)
            for (int y = 0; y < H; ++y)
                for (int ch = 0; ch < count; ++ch) d.at(x0, y, begin + ch) = g.at(x0, y, ch);
        tp.accumulate(xid, d);
    });
}

Var resample(Var x, int target_w, int target_h, ResampleMethod method) {
    Tape& t = *x.tape;
    const Tensor& vx = x.value();
    int src_w = vx.dim(0), src_h = vx.dim(1);
    Tensor out = resample(vx, target_w, target_h, method);
    t.add_flops(resample_flops(src_w, src_h, target_w, target_h, vx.dim(2), method));
    VarId xid = x.id;
    return t.record(std::move(out), {xid}, [xid, src_w, src_h, method](Tape& tp, VarId self) {
        tp.accumulate(xid, resample_adjoint(tp.adjoint(self), src_w, src_h, method));
    });
}

Var avg_pool2(Var x) {
    Tape& t = *x.tape;
    const Tensor& vx = x.value();
    if (vx.rank() != 3) throw DimensionError("avg_pool2 expects a {W,H,C} tensor");
    int W = vx.dim(0), H = vx.dim(1), C = vx.dim(2);
    if (W < 2 || H < 2) throw DimensionError("avg_pool2 needs at least 2x2 input");
    int ow = W / 2, oh = H / 2;
    Tensor out({ow, oh, C});
    for (int x0 = 0; x0 < ow; ++x0)
        for (int y = 0; y < oh; ++y)
            for (int ch = 0; ch < C; ++ch)
                out.at(x0, y, ch) = 0.25 * (vx.at(2 * x0, 2 * y, ch) + vx.at(2 * x0 + 1, 2 * y, ch) +
                                            vx.at(2 * x0, 2 * y + 1, ch) + vx.at(2 * x0 + 1, 2 * y + 1, ch));
    t.add_flops(static_cast<double>(out.numel()) * 4.0);
    VarId xid = x.id;
    return t.record(std::move(out), {xid}, [xid, ow, oh](Tape& tp, VarId self) {
        Tensor g = tp.adjoint(self);
        const Tensor& vx2 = tp.value(xid);
        Tensor d(vx2.shape());
        int C = vx2.dim(2);
        for (int x0 = 0; x0 < ow; ++x0)
            for (int y = 0; y < oh; ++y)
                for (int ch = 0; ch < C; ++ch) {
                    double gv = 0.25 * g.at(x0, y, ch);
                    d.at(2 * x0, 2 * y, ch) += gv;
                    d.at(2 * x0 + 1, 2 * y, ch) += gv;
                    d.at(2 * x0, 2 * y + 1, ch) += gv;
                    d.at(2 * x0 + 1, 2 * y + 1, ch) += gv;
                }
        tp.accumulate(xid, d);
    });
}

Tensor clamp01(const Tensor& x) {
    Tensor out(x.shape());
    const double* px = x.data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::clamp(px[i], 0.0, 1.0);
    return out;
}

} // namespace cubemix
