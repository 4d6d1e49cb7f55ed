#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <tuple>

#include <cubemix/grad_check.hpp>
#include <cubemix/metrics.hpp>
#include <cubemix/network.hpp>

#include "test_util.hpp"

using namespace cubemix;
using namespace cubemix::testutil;

namespace {

NetworkConfig small_config() {
    NetworkConfig cfg;
    cfg.path_scales = {1.0, 0.5, 0.25};
    cfg.blocks_per_path = 1;
    return cfg;
}

void zero_param(NetworkParams& net, int idx) {
    Tensor& t = net.table.value(idx);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = 0.0;
}

// residual-identity mixers, zero convolutions, head bias (1,1,1,0,0,0)
void make_identity(NetworkParams& net) {
    for (PathParams& path : net.paths)
        for (CubicMixerParams* phi : {&path.phi1, &path.phi2})
            for (MixerBlockParams& b : phi->blocks) {
                zero_param(net, b.w2);
                zero_param(net, b.w4);
                zero_param(net, b.w6);
            }
    zero_param(net, net.lfe.conv_w);
    zero_param(net, net.lfe.conv_b);
    zero_param(net, net.lfe.head_w);
    Tensor& hb = net.table.value(net.lfe.head_b);
    hb[0] = hb[1] = hb[2] = 1.0;
    hb[3] = hb[4] = hb[5] = 0.0;
}

Tensor smooth_image(int w, int h, Rng& rng) {
    Tensor img({w, h, 3});
    for (int c = 0; c < 3; ++c) {
        double p1 = rng.uniform(0.0, 6.28), p2 = rng.uniform(0.0, 6.28);
        for (int x = 0; x < w; ++x)
            for (int y = 0; y < h; ++y)
                img.at(x, y, c) = 0.5 + 0.2 * std::sin(2.0 * 3.14159 * 2.0 * x / w + p1) +
                                  0.15 * std::cos(2.0 * 3.14159 * 1.0 * y / h + p2);
    }
    return img;
}

} // namespace

TEST_CASE("config validation") {
    NetworkConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("scales must decrease") {
        cfg.path_scales = {0.25, 0.25, 0.125};
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("scales must be in (0,1]") {
        cfg.path_scales = {1.5, 0.5, 0.25};
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("blocks_per_path >= 1") {
        cfg.blocks_per_path = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("a path below 4x4 is rejected") {
        // 16 * 1/8 = 2 < 4
        CHECK_THROWS_AS(cfg.resolve_path_sizes(16, 16), ConfigError);
        CHECK_NOTHROW(cfg.resolve_path_sizes(64, 64));
    }
}

TEST_CASE("scale_path") {
    ParamTable table;
    CubicMixerParams id1, id2;
    Rng rng(3);

    SUBCASE("scale 1 with identity networks is the roundtrip identity") {
        Tensor b = random_tensor({8, 8, 3}, rng, 0.0, 1.0);
        Tape tape;
        std::vector<Var> vars;
        Var out = scale_path(tape.leaf(b), 1.0, id1, id2, vars);
        CHECK(max_abs_diff(out.value(), b) < 1e-9);
    }
    SUBCASE("constant image stays constant at any scale") {
        Tensor b = Tensor::full({16, 16, 3}, 0.42);
        Tape tape;
        std::vector<Var> vars;
        Var out = scale_path(tape.leaf(b), 0.5, id1, id2, vars);
        CHECK(out.value().shape() == std::vector<int>{8, 8, 3});
        for (std::size_t i = 0; i < out.value().numel(); ++i)
            CHECK(out.value()[i] == doctest::Approx(0.42).epsilon(1e-9));
    }
    SUBCASE("output shape is the floor of the scaled size") {
        Tensor b = random_tensor({21, 13, 3}, rng);
        Tape tape;
        std::vector<Var> vars;
        Var out = scale_path(tape.leaf(b), 0.4, id1, id2, vars);
        CHECK(out.value().shape() == std::vector<int>{8, 5, 3});
    }
    SUBCASE("too small a scale is a configuration error") {
        Tensor b = random_tensor({16, 16, 3}, rng);
        Tape tape;
        std::vector<Var> vars;
        CHECK_THROWS_AS(scale_path(tape.leaf(b), 0.1, id1, id2, vars), ConfigError);
    }
}

TEST_CASE("multiscale_forward") {
    NetworkParams net = init_network(small_config(), Ablation::full, 16, 16, 1);

    SUBCASE("shapes are full resolution") {
        Rng rng(5);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        Tape tape;
        std::vector<Var> vars = net.table.bind(tape);
        std::vector<Var> maps = multiscale_forward(tape.leaf(b), net, vars);
        REQUIRE(maps.size() == 3);
        for (const Var& m : maps) CHECK(m.value().shape() == std::vector<int>{16, 16, 3});
    }
    SUBCASE("zero input gives zero maps") {
        Tensor zero({16, 16, 3});
        Tape tape;
        std::vector<Var> vars = net.table.bind(tape);
        std::vector<Var> maps = multiscale_forward(tape.leaf(zero), net, vars);
        for (const Var& m : maps) CHECK(m.value().sum() == 0.0);
    }
    SUBCASE("identity paths equal the bicubic roundtrips") {
        NetworkParams idnet = init_network(small_config(), Ablation::full, 32, 32, 1);
        make_identity(idnet);
        Rng rng(7);
        Tensor b = smooth_image(32, 32, rng);
        Tape tape;
        std::vector<Var> vars = idnet.table.bind(tape);
        std::vector<Var> maps = multiscale_forward(tape.leaf(b), idnet, vars);
        double scales[3] = {1.0, 0.5, 0.25};
        for (int p = 0; p < 3; ++p) {
            int lw = static_cast<int>(32 * scales[p]), lh = lw;
            Tensor oracle = resample(resample(b, lw, lh, ResampleMethod::bicubic), 32, 32,
                                     ResampleMethod::bicubic);
            CHECK(max_abs_diff(maps[static_cast<std::size_t>(p)].value(), oracle) < 1e-9);
            // band-limited content survives the round trip
            double net_psnr = psnr(maps[static_cast<std::size_t>(p)].value(), b);
            double oracle_psnr = psnr(oracle, b);
            CHECK(net_psnr > 30.0);
            if (std::isinf(oracle_psnr))
                CHECK(net_psnr > 100.0); // scale-1 roundtrip is exact up to FFT noise
            else
                CHECK(std::abs(net_psnr - oracle_psnr) < 0.5);
        }
    }
}

TEST_CASE("local feature head") {
    SUBCASE("bias-only path fills the slice maps") {
        NetworkParams net = init_network(small_config(), Ablation::full, 16, 16, 2);
        make_identity(net);
        Rng rng(11);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        Tape tape;
        std::vector<Var> vars = net.table.bind(tape);
        Var in = tape.leaf(b);
        std::vector<Var> maps = multiscale_forward(in, net, vars);
        Var head = local_feature_head(in, maps, net, vars);
        CHECK(head.value().shape() == std::vector<int>{16, 16, 6});
        SliceMapVars m = split_slice_maps(head);
        for (std::size_t i = 0; i < m.w_red.value().numel(); ++i) {
            CHECK(m.w_red.value()[i] == 1.0);
            CHECK(m.w_green.value()[i] == 1.0);
            CHECK(m.w_blue.value()[i] == 1.0);
            CHECK(m.b_red.value()[i] == 0.0);
            CHECK(m.b_green.value()[i] == 0.0);
            CHECK(m.b_blue.value()[i] == 0.0);
        }
    }
    SUBCASE("1x1 and 3x3 local features differ on non-constant input") {
        NetworkParams k3 = init_network(small_config(), Ablation::full, 16, 16, 2);
        NetworkConfig cfg1 = small_config();
        cfg1.lfe_kernel = 1;
        NetworkParams k1 = init_network(cfg1, Ablation::full, 16, 16, 2);
        Rng rng(13);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        Tensor o3 = deblur_infer(b, k3);
        Tensor o1 = deblur_infer(b, k1);
        CHECK(max_abs_diff(o3, o1) > 1e-6);
    }
}

TEST_CASE("slice_apply") {
    Rng rng(17);
    Tensor b = random_tensor({6, 5, 3}, rng, 0.0, 1.0);
    auto plane = [&](double v) { return Tensor::full({6, 5, 1}, v); };

    Tape tape;
    Var vb = tape.leaf(b);
    auto maps = [&](double w, double off) {
        SliceMapVars m;
        m.w_red = tape.leaf(plane(w));
        m.w_green = tape.leaf(plane(w));
        m.w_blue = tape.leaf(plane(w));
        m.b_red = tape.leaf(plane(off));
        m.b_green = tape.leaf(plane(off));
        m.b_blue = tape.leaf(plane(off));
        return m;
    };

    SUBCASE("identity maps reproduce the image exactly") {
        CHECK(bit_identical(slice_apply(vb, maps(1.0, 0.0)).value(), b));
    }
    SUBCASE("zero weights copy the offset planes") {
        Tensor target = random_tensor({6, 5, 3}, rng);
        SliceMapVars m;
        m.w_red = tape.leaf(plane(0.0));
        m.w_green = tape.leaf(plane(0.0));
        m.w_blue = tape.leaf(plane(0.0));
        m.b_red = tape.leaf(channel_slice(tape.leaf(target), 0, 1).value());
        m.b_green = tape.leaf(channel_slice(tape.leaf(target), 1, 1).value());
        m.b_blue = tape.leaf(channel_slice(tape.leaf(target), 2, 1).value());
        CHECK(max_abs_diff(slice_apply(vb, m).value(), target) == 0.0);
    }
    SUBCASE("W=2, b=-0.5 on a constant 0.5 image gives 0.5") {
        Tensor half = Tensor::full({6, 5, 3}, 0.5);
        Var vh = tape.leaf(half);
        Tensor out = slice_apply(vh, maps(2.0, -0.5)).value();
        for (std::size_t i = 0; i < out.numel(); ++i) CHECK(out[i] == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("size mismatch is rejected") {
        SliceMapVars m = maps(1.0, 0.0);
        Var small = tape.leaf(random_tensor({4, 4, 3}, rng));
        CHECK_THROWS_AS(slice_apply(small, m), DimensionError);
    }
    SUBCASE("polynomial variant") {
        Tensor out = slice_apply_poly(vb, maps(1.0, 0.0)).value();
        for (int x = 0; x < 6; ++x)
            for (int y = 0; y < 5; ++y)
                for (int c = 0; c < 3; ++c)
                    CHECK(out.at(x, y, c) == doctest::Approx(b.at(x, y, c) * b.at(x, y, c)));
        Tensor quarter = slice_apply_poly(vb, maps(0.0, 0.5)).value();
        for (std::size_t i = 0; i < quarter.numel(); ++i) CHECK(quarter[i] == doctest::Approx(0.25));
        Tensor rnd = slice_apply_poly(vb, maps(-1.3, 0.2)).value();
        for (std::size_t i = 0; i < rnd.numel(); ++i) CHECK(rnd[i] >= 0.0);
    }
    SUBCASE("nonzero weight planes make the slice invertible") {
        Rng r2(19);
        Tensor w = random_tensor({6, 5, 1}, r2, 0.5, 1.5);
        Tensor off = random_tensor({6, 5, 1}, r2, -0.3, 0.3);
        SliceMapVars m;
        m.w_red = tape.leaf(w);
        m.w_green = tape.leaf(w);
        m.w_blue = tape.leaf(w);
        m.b_red = tape.leaf(off);
        m.b_green = tape.leaf(off);
        m.b_blue = tape.leaf(off);
        Tensor out = slice_apply(vb, m).value();
        Tensor recon(b.shape());
        for (int x = 0; x < 6; ++x)
            for (int y = 0; y < 5; ++y)
                for (int c = 0; c < 3; ++c)
                    recon.at(x, y, c) = (out.at(x, y, c) - off.at(x, y, 0)) / w.at(x, y, 0);
        CHECK(max_abs_diff(recon, b) < 1e-12);
    }
}

TEST_CASE("deblur_forward") {
    SUBCASE("output shape equals input shape") {
        NetworkParams net = init_network(small_config(), Ablation::full, 16, 16, 23);
        Rng rng(23);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        CHECK(deblur_infer(b, net).shape() == b.shape());
    }
    SUBCASE("the composed identity configuration is exact through the FFT roundtrip") {
        NetworkParams net = init_network(small_config(), Ablation::full, 16, 16, 29);
        make_identity(net);
        Rng rng(29);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        CHECK(max_abs_diff(deblur_infer(b, net), b) < 1e-9);
    }
    SUBCASE("polynomial slicing mode squares the affine result") {
        NetworkConfig cfg = small_config();
        cfg.slicing_mode = SlicingMode::polynomial;
        NetworkParams net = init_network(cfg, Ablation::full, 16, 16, 29);
        make_identity(net); // W=1, b=0: affine would be b, polynomial is b^2
        Rng rng(29);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        Tensor out = deblur_infer(b, net);
        Tensor expected(b.shape());
        for (std::size_t i = 0; i < b.numel(); ++i) expected[i] = b[i] * b[i];
        CHECK(max_abs_diff(out, expected) < 1e-9);
    }
    SUBCASE("end-to-end gradients pass at toy size") {
        NetworkConfig cfg;
        cfg.path_sizes = {{4, 4}};
        cfg.blocks_per_path = 1;
        NetworkParams net = init_network(cfg, Ablation::full, 8, 8, 31);
        Rng rng(31);
        Tensor b = random_tensor({8, 8, 3}, rng, 0.1, 0.9);

        std::vector<Tensor> inputs;
        inputs.push_back(b);
        for (int i = 0; i < net.table.count(); ++i) inputs.push_back(net.table.value(i));
        GradCheckReport rep = grad_check_many(
            [&](Tape&, const std::vector<Var>& vs) {
                std::vector<Var> vars(vs.begin() + 1, vs.end());
                return mean(square(deblur_forward(vs[0], net, vars)));
            },
            inputs, 1e-6, 1e-4);
        INFO(rep.summary());
        CHECK(rep.pass);
    }
}

TEST_CASE("param_count") {
    SUBCASE("empty parameter set counts zero") {
        NetworkParams empty;
        CHECK(param_count(empty) == 0);
    }
    SUBCASE("mixer blocks match the closed-form count") {
        NetworkConfig cfg;
        cfg.path_sizes = {{8, 6}};
        cfg.blocks_per_path = 1;
        NetworkParams net = init_network(cfg, Ablation::full, 32, 32, 1);
        std::size_t lfe = 3ull * 3 * 6 * 6 + 6 + 6 + 6 * 6 + 6; // conv3 + bias + prelu + head + bias
        std::size_t mixer = 2 * mixer_block_param_count(8, 6, 3, 1.0);
        CHECK(param_count(net) == mixer + lfe);
    }
    SUBCASE("doubling blocks_per_path doubles the mixer parameters") {
        NetworkConfig cfg4;
        cfg4.path_sizes = {{8, 8}, {6, 6}, {4, 4}};
        NetworkConfig cfg8 = cfg4;
        cfg4.blocks_per_path = 4;
        cfg8.blocks_per_path = 8;
        NetworkParams n4 = init_network(cfg4, Ablation::full, 64, 64, 1);
        NetworkParams n8 = init_network(cfg8, Ablation::full, 64, 64, 1);
        std::size_t lfe = 3ull * 3 * 12 * 12 + 12 + 12 + 12 * 6 + 6;
        CHECK(param_count(n8) - lfe == 2 * (param_count(n4) - lfe));
    }
    SUBCASE("fixed absolute path sizes decouple the count from resolution") {
        NetworkConfig cfg;
        cfg.path_sizes = {{24, 24}, {12, 12}, {6, 6}};
        NetworkParams small = init_network(cfg, Ablation::full, 96, 96, 7);
        NetworkParams large = init_network(cfg, Ablation::full, 192, 192, 7);
        CHECK(param_count(small) == param_count(large));
    }
}

TEST_CASE("resolution decoupling of the measured FLOP split") {
    NetworkConfig cfg;
    cfg.path_sizes = {{24, 24}, {12, 12}, {6, 6}};
    NetworkParams net = init_network(cfg, Ablation::full, 96, 96, 3);
    Rng rng(37);
    Tensor small = random_tensor({96, 96, 3}, rng, 0.0, 1.0);
    Tensor large = random_tensor({192, 192, 3}, rng, 0.0, 1.0);

    ForwardStats s_small, s_large;
    deblur_infer(small, net, &s_small);
    deblur_infer(large, net, &s_large);

    CHECK(s_small.mixer_flops == s_large.mixer_flops);
    double ratio = s_large.fullres_flops / s_small.fullres_flops;
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("ablation parameter audits") {
    NetworkConfig cfg = small_config();
    auto table_of = [&](Ablation a) {
        NetworkParams net = init_network(cfg, a, 16, 16, 5);
        std::vector<std::pair<std::string, std::vector<int>>> entries;
        for (int i = 0; i < net.table.count(); ++i)
            entries.emplace_back(net.table.name(i), net.table.value(i).shape());
        return entries;
    };
    auto full = table_of(Ablation::full);

    SUBCASE("d-real and d-imag change only the plane feed") {
        CHECK(table_of(Ablation::d_real) == full);
        CHECK(table_of(Ablation::d_imag) == full);
        NetworkParams net = init_network(cfg, Ablation::d_real, 16, 16, 5);
        CHECK(net.feed() == SpectralFeed::double_real);
        NetworkParams net2 = init_network(cfg, Ablation::d_imag, 16, 16, 5);
        CHECK(net2.feed() == SpectralFeed::double_imag);
    }
    SUBCASE("wo-ms keeps only the top path and narrows the fusion") {
        auto t = table_of(Ablation::wo_ms);
        for (const auto& entry : t) CHECK(entry.first.find("path1") == std::string::npos);
        NetworkParams net = init_network(cfg, Ablation::wo_ms, 16, 16, 5);
        CHECK(net.paths.size() == 1);
        CHECK(net.table.value(net.lfe.conv_w).shape() == std::vector<int>{3, 3, 6, 6});
        CHECK(net.table.value(net.lfe.head_w).shape() == std::vector<int>{1, 1, 6, 6});
    }
    SUBCASE("wo-ss regresses 3 channels directly") {
        NetworkParams net = init_network(cfg, Ablation::wo_ss, 16, 16, 5);
        CHECK(net.table.value(net.lfe.head_w).shape() == std::vector<int>{1, 1, 12, 3});
        Rng rng(41);
        Tensor b = random_tensor({16, 16, 3}, rng, 0.0, 1.0);
        CHECK(deblur_infer(b, net).shape() == b.shape());
    }
    SUBCASE("wo-lfe switches the local convolution to 1x1") {
        NetworkParams net = init_network(cfg, Ablation::wo_lfe, 16, 16, 5);
        CHECK(net.table.value(net.lfe.conv_w).shape() == std::vector<int>{1, 1, 12, 12});
        // everything else matches the full model
        NetworkParams f = init_network(cfg, Ablation::full, 16, 16, 5);
        CHECK(net.table.count() == f.table.count());
        for (int i = 0; i < net.table.count(); ++i) {
            CHECK(net.table.name(i) == f.table.name(i));
            if (net.table.name(i) != "lfe.conv.w")
                CHECK(net.table.value(i).shape() == f.table.value(i).shape());
        }
    }
}

TEST_CASE("seeded initialization is reproducible") {
    NetworkConfig cfg = small_config();
    NetworkParams a = init_network(cfg, Ablation::full, 16, 16, 77);
    NetworkParams b = init_network(cfg, Ablation::full, 16, 16, 77);
    NetworkParams c = init_network(cfg, Ablation::full, 16, 16, 78);
    REQUIRE(a.table.count() == b.table.count());
    bool all_same = true, any_diff = false;
    for (int i = 0; i < a.table.count(); ++i) {
        if (!bit_identical(a.table.value(i), b.table.value(i))) all_same = false;
        if (!bit_identical(a.table.value(i), c.table.value(i))) any_diff = true;
    }
    CHECK(all_same);
    CHECK(any_diff);
}
