#include "cubemix/network.hpp"

#include <cmath>

namespace cubemix {

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::d_real: return "d-real";
        case Ablation::d_imag: return "d-imag";
        case Ablation::wo_ms: return "wo-ms";
        case Ablation::wo_ss: return "wo-ss";
        case Ablation::wo_lfe: return "wo-lfe";
    }
    return "full";
}

std::string to_string(SlicingMode m) {
    return m == SlicingMode::affine ? "affine" : "polynomial";
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "full") return Ablation::full;
    if (s == "d-real") return Ablation::d_real;
    if (s == "d-imag") return Ablation::d_imag;
    if (s == "wo-ms") return Ablation::wo_ms;
    if (s == "wo-ss") return Ablation::wo_ss;
    if (s == "wo-lfe") return Ablation::wo_lfe;
    throw ConfigError("unknown ablation '" + s + "'");
}

SlicingMode slicing_from_string(const std::string& s) {
    if (s == "affine") return SlicingMode::affine;
    if (s == "polynomial") return SlicingMode::polynomial;
    throw ConfigError("unknown slicing mode '" + s + "'");
}

void NetworkConfig::validate() const {
    if (path_sizes.empty()) {
        if (path_scales.empty()) throw ConfigError("network needs at least one path");
        double prev = 1.0 + 1e-12;
        for (double s : path_scales) {
            if (s <= 0.0 || s > 1.0) throw ConfigError("path scales must be in (0,1]");
            if (s >= prev) throw ConfigError("path scales must be strictly decreasing");
            prev = s;
        }
    } else {
        for (const PathSize& ps : path_sizes)
            if (ps.w < 4 || ps.h < 4)
                throw ConfigError("path sizes must be at least 4x4, got " + std::to_string(ps.w) +
                                  "x" + std::to_string(ps.h));
    }
    if (blocks_per_path < 1) throw ConfigError("blocks_per_path must be >= 1");
    if (channels != 3) throw ConfigError("the deblurring pipeline expects 3 channels");
    if (hidden_ratio <= 0.0) throw ConfigError("hidden_ratio must be positive");
    if (lfe_kernel != 1 && lfe_kernel != 3) throw ConfigError("lfe_kernel must be 1 or 3");
}

std::vector<PathSize> NetworkConfig::resolve_path_sizes(int input_w, int input_h) const {
    if (!path_sizes.empty()) return path_sizes;
    std::vector<PathSize> out;
    for (double s : path_scales) {
        PathSize ps{static_cast<int>(std::floor(input_w * s)),
                    static_cast<int>(std::floor(input_h * s))};
        if (ps.w < 4 || ps.h < 4)
            throw ConfigError("path scale " + std::to_string(s) + " makes a " +
                              std::to_string(ps.w) + "x" + std::to_string(ps.h) +
                              " plane; the minimum is 4x4");
        out.push_back(ps);
    }
    return out;
}

SpectralFeed NetworkParams::feed() const {
    if (ablation == Ablation::d_real) return SpectralFeed::double_real;
    if (ablation == Ablation::d_imag) return SpectralFeed::double_imag;
    return SpectralFeed::real_imag;
}

int NetworkParams::concat_channels_in() const {
    return config.channels * (1 + static_cast<int>(paths.size()));
}

int NetworkParams::head_out_channels() const { return ablation == Ablation::wo_ss ? 3 : 6; }

int NetworkParams::effective_lfe_kernel() const {
    return ablation == Ablation::wo_lfe ? 1 : config.lfe_kernel;
}

namespace {

Tensor uniform_conv(int k, int cin, int cout, Rng& rng) {
    Tensor t({k, k, cin, cout});
    double bound = 1.0 / std::sqrt(static_cast<double>(k) * k * cin);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

} // namespace

NetworkParams init_network(const NetworkConfig& cfg, Ablation ablation, int input_w, int input_h,
                           std::uint64_t seed) {
    cfg.validate();
    NetworkParams net;
    net.config = cfg;
    net.ablation = ablation;
    net.config.path_sizes = cfg.resolve_path_sizes(input_w, input_h);
    net.config.path_scales.clear();
    if (ablation == Ablation::wo_ms)
        net.config.path_sizes.resize(1); // top path only

    Rng rng(seed);
    int c = cfg.channels;
    for (std::size_t i = 0; i < net.config.path_sizes.size(); ++i) {
        const PathSize& ps = net.config.path_sizes[i];
        PathParams path;
        path.size = ps;
        std::string prefix = "path" + std::to_string(i);
        path.phi1 = init_cubic_mixer(net.table, prefix + ".phi1", cfg.blocks_per_path, ps.w, ps.h,
                                     c, cfg.hidden_ratio, rng);
        path.phi2 = init_cubic_mixer(net.table, prefix + ".phi2", cfg.blocks_per_path, ps.w, ps.h,
                                     c, cfg.hidden_ratio, rng);
        net.paths.push_back(std::move(path));
    }

    int t_channels = net.concat_channels_in();
    int k = net.effective_lfe_kernel();
    net.lfe.conv_w = net.table.add("lfe.conv.w", uniform_conv(k, t_channels, t_channels, rng));
    net.lfe.conv_b = net.table.add("lfe.conv.b", Tensor({t_channels}));
    net.lfe.prelu_slope = net.table.add("lfe.prelu", Tensor::full({t_channels}, 0.25));
    net.lfe.head_w =
        net.table.add("head.conv.w", uniform_conv(1, t_channels, net.head_out_channels(), rng));
    net.lfe.head_b = net.table.add("head.conv.b", Tensor({net.head_out_channels()}));
    return net;
}

std::size_t param_count(const NetworkParams& params) { return params.table.scalar_count(); }

Var scale_path(Var b, double scale, const CubicMixerParams& phi1, const CubicMixerParams& phi2,
               std::span<const Var> vars, SpectralFeed feed) {
    int tw = static_cast<int>(std::floor(b.value().dim(0) * scale));
    int th = static_cast<int>(std::floor(b.value().dim(1) * scale));
    if (tw < 4 || th < 4)
        throw ConfigError("scale " + std::to_string(scale) + " makes a " + std::to_string(tw) +
                          "x" + std::to_string(th) + " plane; the minimum is 4x4");
    Var low = resample(b, tw, th, ResampleMethod::bicubic);
    return wfp_apply(low, phi1, phi2, vars, feed);
}

std::vector<Var> multiscale_forward(Var b, const NetworkParams& params,
                                    std::span<const Var> vars, ForwardStats* stats) {
    Tape& tape = *b.tape;
    int full_w = b.value().dim(0), full_h = b.value().dim(1);
    SpectralFeed feed = params.feed();
    std::vector<Var> maps;
    for (const PathParams& path : params.paths) {
        double f0 = tape.flops();
        Var low = resample(b, path.size.w, path.size.h, ResampleMethod::bicubic);
        double f1 = tape.flops();
        Var processed = wfp_apply(low, path.phi1, path.phi2, vars, feed);
        double f2 = tape.flops();
        Var up = resample(processed, full_w, full_h, ResampleMethod::bicubic);
        double f3 = tape.flops();
        if (stats) {
            stats->mixer_flops += f2 - f1;
            stats->fullres_flops += (f1 - f0) + (f3 - f2);
        }
        maps.push_back(up);
    }
    return maps;
}

Var local_feature_head(Var b, const std::vector<Var>& feature_maps, const NetworkParams& params,
                       std::span<const Var> vars) {
    std::vector<Var> pieces;
    pieces.push_back(b);
    for (const Var& f : feature_maps) pieces.push_back(f);
    Var t = concat_channels(pieces);
    if (t.value().dim(2) != params.concat_channels_in())
        throw DimensionError("local feature input has " + std::to_string(t.value().dim(2)) +
                             " channels, expected " + std::to_string(params.concat_channels_in()));
    Var conv = conv2d(t, vars[static_cast<std::size_t>(params.lfe.conv_w)],
                      vars[static_cast<std::size_t>(params.lfe.conv_b)]);
    Var act = prelu(conv, vars[static_cast<std::size_t>(params.lfe.prelu_slope)]);
    return conv2d(act, vars[static_cast<std::size_t>(params.lfe.head_w)],
                  vars[static_cast<std::size_t>(params.lfe.head_b)]);
}

SliceMapVars split_slice_maps(Var head_out) {
    if (head_out.value().dim(2) != 6)
        throw DimensionError("slice maps need a 6-channel tensor, got " +
                             shape_str(head_out.value().shape()));
    SliceMapVars m;
    m.w_red = channel_slice(head_out, 0, 1);
    m.w_green = channel_slice(head_out, 1, 1);
    m.w_blue = channel_slice(head_out, 2, 1);
    m.b_red = channel_slice(head_out, 3, 1);
    m.b_green = channel_slice(head_out, 4, 1);
    m.b_blue = channel_slice(head_out, 5, 1);
    return m;
}

namespace {

void check_slice_shapes(Var b, const SliceMapVars& m) {
    const Tensor& vb = b.value();
    if (vb.rank() != 3 || vb.dim(2) != 3) throw DimensionError("slice_apply expects a {W,H,3} image");
    for (const Var* plane : {&m.w_red, &m.w_green, &m.w_blue, &m.b_red, &m.b_green, &m.b_blue}) {
        const Tensor& vp = plane->value();
        if (vp.dim(0) != vb.dim(0) || vp.dim(1) != vb.dim(1) || vp.dim(2) != 1)
            throw DimensionError("slice map size " + shape_str(vp.shape()) +
                                 " does not match image " + shape_str(vb.shape()));
    }
}

} // namespace

Var slice_apply(Var b, const SliceMapVars& m) {
    check_slice_shapes(b, m);
    Var r = add(mul(m.w_red, channel_slice(b, 0, 1)), m.b_red);
    Var g = add(mul(m.w_green, channel_slice(b, 1, 1)), m.b_green);
    Var bl = add(mul(m.w_blue, channel_slice(b, 2, 1)), m.b_blue);
    return concat_channels({r, g, bl});
}

Var slice_apply_poly(Var b, const SliceMapVars& m) {
    check_slice_shapes(b, m);
    Var r = square(add(mul(m.w_red, channel_slice(b, 0, 1)), m.b_red));
    Var g = square(add(mul(m.w_green, channel_slice(b, 1, 1)), m.b_green));
    Var bl = square(add(mul(m.w_blue, channel_slice(b, 2, 1)), m.b_blue));
    return concat_channels({r, g, bl});
}

Var deblur_forward(Var b, const NetworkParams& params, std::span<const Var> vars,
                   ForwardStats* stats) {
    Tape& tape = *b.tape;
    std::vector<Var> maps = multiscale_forward(b, params, vars, stats);
    double f0 = tape.flops();
    Var head = local_feature_head(b, maps, params, vars);
    Var out{};
    if (params.ablation == Ablation::wo_ss) {
        out = head; // direct regression, no slicing
    } else {
        SliceMapVars m = split_slice_maps(head);
        out = params.config.slicing_mode == SlicingMode::polynomial ? slice_apply_poly(b, m)
                                                                    : slice_apply(b, m);
    }
    if (stats) stats->fullres_flops += tape.flops() - f0;
    return out;
}

Tensor deblur_infer(const Tensor& b, const NetworkParams& params, ForwardStats* stats) {
    Tape tape;
    std::vector<Var> vars = params.table.bind(tape);
    Var in = tape.leaf(b);
    Var out = deblur_forward(in, params, vars, stats);
    return out.value();
}

} // namespace cubemix
