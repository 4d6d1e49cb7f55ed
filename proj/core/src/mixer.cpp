#include "cubemix/mixer.hpp"

#include <cmath>

namespace cubemix {

int mixer_hidden_size(int extent, double hidden_ratio) {
    int h = static_cast<int>(std::lround(extent * hidden_ratio));
    return h < 1 ? 1 : h;
}

namespace {

Tensor uniform_matrix(int rows, int cols, Rng& rng) {
    Tensor t({rows, cols});
    double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

} // namespace

MixerBlockParams init_mixer_block(ParamTable& table, const std::string& prefix, int w, int h,
                                  int c, double hidden_ratio, Rng& rng) {
    int wh = mixer_hidden_size(w, hidden_ratio);
    int hh = mixer_hidden_size(h, hidden_ratio);
    int ch = mixer_hidden_size(c, hidden_ratio);
    MixerBlockParams p;
    p.w1 = table.add(prefix + ".w1", uniform_matrix(w, wh, rng));
    p.b1 = table.add(prefix + ".b1", Tensor({wh}));
    p.w2 = table.add(prefix + ".w2", uniform_matrix(wh, w, rng));
    p.b2 = table.add(prefix + ".b2", Tensor({w}));
    p.w3 = table.add(prefix + ".w3", uniform_matrix(h, hh, rng));
    p.b3 = table.add(prefix + ".b3", Tensor({hh}));
    p.w4 = table.add(prefix + ".w4", uniform_matrix(hh, h, rng));
    p.b4 = table.add(prefix + ".b4", Tensor({h}));
    p.w5 = table.add(prefix + ".w5", uniform_matrix(c, ch, rng));
    p.b5 = table.add(prefix + ".b5", Tensor({ch}));
    p.w6 = table.add(prefix + ".w6", uniform_matrix(ch, c, rng));
    p.b6 = table.add(prefix + ".b6", Tensor({c}));
    return p;
}

CubicMixerParams init_cubic_mixer(ParamTable& table, const std::string& prefix, int blocks,
                                  int w, int h, int c, double hidden_ratio, Rng& rng) {
    CubicMixerParams p;
    for (int i = 0; i < blocks; ++i)
        p.blocks.push_back(
            init_mixer_block(table, prefix + ".block" + std::to_string(i), w, h, c, hidden_ratio, rng));
    return p;
}

std::size_t mixer_block_param_count(int w, int h, int c, double hidden_ratio) {
    std::size_t wh = static_cast<std::size_t>(mixer_hidden_size(w, hidden_ratio));
    std::size_t hh = static_cast<std::size_t>(mixer_hidden_size(h, hidden_ratio));
    std::size_t ch = static_cast<std::size_t>(mixer_hidden_size(c, hidden_ratio));
    std::size_t uw = static_cast<std::size_t>(w), uh = static_cast<std::size_t>(h),
                uc = static_cast<std::size_t>(c);
    return 2 * uw * wh + 2 * uh * hh + 2 * uc * ch + (wh + uw) + (hh + uh) + (ch + uc);
}

Var mixer_block(Var x, const MixerBlockParams& p, std::span<const Var> vars) {
    Var f = add(x, axis_linear(relu(axis_linear(x, Axis::W, vars[static_cast<std::size_t>(p.w1)],
                                                vars[static_cast<std::size_t>(p.b1)])),
                               Axis::W, vars[static_cast<std::size_t>(p.w2)],
                               vars[static_cast<std::size_t>(p.b2)]));
    f = add(f, axis_linear(relu(axis_linear(f, Axis::H, vars[static_cast<std::size_t>(p.w3)],
                                            vars[static_cast<std::size_t>(p.b3)])),
                           Axis::H, vars[static_cast<std::size_t>(p.w4)],
                           vars[static_cast<std::size_t>(p.b4)]));
    f = add(f, axis_linear(relu(axis_linear(f, Axis::C, vars[static_cast<std::size_t>(p.w5)],
                                            vars[static_cast<std::size_t>(p.b5)])),
                           Axis::C, vars[static_cast<std::size_t>(p.w6)],
                           vars[static_cast<std::size_t>(p.b6)]));
    return f;
}

Var cubic_mixer(Var x, const CubicMixerParams& p, std::span<const Var> vars) {
    Var f = x;
    for (const MixerBlockParams& block : p.blocks) f = mixer_block(f, block, vars);
    return f;
}

Var wfp_apply(Var b_low, const CubicMixerParams& phi1, const CubicMixerParams& phi2,
              std::span<const Var> vars, SpectralFeed feed) {
    SpectralVars s = fft2(b_low);
    Var in1 = s.real, in2 = s.imag;
    if (feed == SpectralFeed::double_real) in2 = s.real;
    if (feed == SpectralFeed::double_imag) in1 = s.imag;
    Var out_real = cubic_mixer(in1, phi1, vars);
    Var out_imag = cubic_mixer(in2, phi2, vars);
    return ifft2_real({out_real, out_imag});
}

} // namespace cubemix
