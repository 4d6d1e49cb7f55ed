#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <cubemix/checkpoint.hpp>
#include <cubemix/commands.hpp>
#include <cubemix/image_io.hpp>
#include <cubemix/threading.hpp>

#include "test_util.hpp"

using namespace cubemix;
using namespace cubemix::testutil;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("cubemix_test_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const char* kTinyConfig =
    "# tiny training setup\n"
    "seed = 3\n"
    "network.path_sizes = 8x8,4x4\n"
    "network.blocks_per_path = 1\n"
    "train.iterations = 2\n"
    "train.batch_size = 2\n"
    "train.eval_every = 1\n"
    "data.count = 4\n"
    "data.holdout = 2\n"
    "data.patch = 32\n";

std::string tiny_config_with_io(const Scratch& s, const std::string& tag) {
    std::string text = kTinyConfig;
    text += "io.checkpoint = " + s.path(tag + ".cbmx") + "\n";
    text += "io.metrics = " + s.path(tag + "_metrics.csv") + "\n";
    text += "io.ablate = " + s.path(tag + "_ablate.csv") + "\n";
    std::string cfg_path = s.path(tag + ".cfg");
    write_file(cfg_path, text);
    return cfg_path;
}

NetworkParams identity_network() {
    NetworkConfig cfg;
    cfg.path_sizes = {{8, 8}, {4, 4}};
    cfg.blocks_per_path = 1;
    NetworkParams net = init_network(cfg, Ablation::full, 32, 32, 1);
    for (PathParams& path : net.paths)
        for (CubicMixerParams* phi : {&path.phi1, &path.phi2})
            for (MixerBlockParams& b : phi->blocks)
                for (int idx : {b.w2, b.w4, b.w6}) {
                    Tensor& t = net.table.value(idx);
                    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = 0.0;
                }
    for (int idx : {net.lfe.conv_w, net.lfe.conv_b, net.lfe.head_w}) {
        Tensor& t = net.table.value(idx);
        for (std::size_t i = 0; i < t.numel(); ++i) t[i] = 0.0;
    }
    Tensor& hb = net.table.value(net.lfe.head_b);
    hb[0] = hb[1] = hb[2] = 1.0;
    return net;
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("defaults plus overrides") {
        RunConfig cfg = parse_config_text("seed = 9\ntrain.lr = 2e-4\n# comment\n\n");
        CHECK(cfg.seed == 9);
        CHECK(cfg.train.seed == 9);
        CHECK(cfg.train.lr == doctest::Approx(2e-4));
        CHECK(cfg.net.path_scales.size() == 3);
        CHECK(cfg.data_patch == 96);
    }
    SUBCASE("unknown keys are hard errors") {
        CHECK_THROWS_AS(parse_config_text("network.block_count = 4\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("typo = 1\n"), ConfigError);
    }
    SUBCASE("malformed values are rejected") {
        CHECK_THROWS_AS(parse_config_text("train.lr = fast\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("train.iterations = 1.5\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("no_equals_sign\n"), ConfigError);
    }
    SUBCASE("scales that make a path smaller than 4x4 are rejected up front") {
        CHECK_THROWS_AS(parse_config_text("data.patch = 16\n"), ConfigError); // 16/8 = 2
        CHECK_NOTHROW(parse_config_text("data.patch = 64\n"));
    }
    SUBCASE("scales and absolute sizes are mutually exclusive") {
        CHECK_THROWS_AS(
            parse_config_text("network.scales = 0.5,0.25\nnetwork.path_sizes = 8x8,4x4\n"),
            ConfigError);
    }
    SUBCASE("ablate variants parse") {
        RunConfig cfg = parse_config_text("ablate.variants = d-real,wo-ms\n");
        REQUIRE(cfg.ablate_variants.size() == 2);
        CHECK(cfg.ablate_variants[0] == Ablation::d_real);
        CHECK(cfg.ablate_variants[1] == Ablation::wo_ms);
    }
}

TEST_CASE("checkpoint roundtrip") {
    Scratch s;
    NetworkConfig cfg;
    cfg.path_sizes = {{8, 8}, {4, 4}};
    cfg.blocks_per_path = 2;
    NetworkParams net = init_network(cfg, Ablation::d_real, 32, 32, 17);

    std::string p1 = s.path("a.cbmx");
    std::string p2 = s.path("b.cbmx");
    checkpoint_save(p1, net);
    NetworkParams loaded = checkpoint_load(p1);
    checkpoint_save(p2, loaded);

    SUBCASE("save -> load -> save is byte-identical") { CHECK(read_file(p1) == read_file(p2)); }
    SUBCASE("structure and values survive") {
        CHECK(loaded.ablation == Ablation::d_real);
        CHECK(loaded.config.path_sizes.size() == 2);
        CHECK(loaded.config.blocks_per_path == 2);
        REQUIRE(loaded.table.count() == net.table.count());
        for (int i = 0; i < net.table.count(); ++i) {
            CHECK(loaded.table.name(i) == net.table.name(i));
            // float32 storage, so double values round
            for (std::size_t j = 0; j < net.table.value(i).numel(); ++j)
                CHECK(loaded.table.value(i)[j] ==
                      static_cast<double>(static_cast<float>(net.table.value(i)[j])));
        }
    }
    SUBCASE("corruption is detected") {
        std::string bytes = read_file(p1);
        bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
        std::string bad = s.path("bad.cbmx");
        write_file(bad, bytes);
        CHECK_THROWS_AS(checkpoint_load(bad), IoError);
    }
    SUBCASE("truncation is detected") {
        std::string bytes = read_file(p1);
        write_file(s.path("short.cbmx"), bytes.substr(0, bytes.size() / 2));
        CHECK_THROWS_AS(checkpoint_load(s.path("short.cbmx")), IoError);
    }
}

TEST_CASE("ppm io") {
    Scratch s;
    SUBCASE("write/read roundtrip is lossless at 8-bit granularity") {
        Rng rng(7);
        Tensor img({9, 5, 3});
        for (std::size_t i = 0; i < img.numel(); ++i)
            img[i] = static_cast<double>(rng.next_index(256)) / 255.0;
        std::string p = s.path("img.ppm");
        image_write(p, img);
        Tensor back = image_read(p);
        CHECK(bit_identical(back, img));
        // writing again reproduces the same bytes
        std::string p2 = s.path("img2.ppm");
        image_write(p2, back);
        CHECK(read_file(p) == read_file(p2));
    }
    SUBCASE("header is the canonical P6 form") {
        Tensor img = Tensor::full({3, 2, 3}, 0.0);
        std::string p = s.path("hdr.ppm");
        image_write(p, img);
        std::string bytes = read_file(p);
        CHECK(bytes.substr(0, 11) == "P6\n3 2\n255\n");
        CHECK(bytes.size() == 11 + 3 * 2 * 3);
    }
    SUBCASE("quantization is round-half-up") {
        CHECK(quantize8(0.0) == 0);
        CHECK(quantize8(1.0) == 255);
        CHECK(quantize8(0.5) == 128);       // 127.5 + 0.5
        CHECK(quantize8(127.4 / 255.0) == 127);
        CHECK(quantize8(-3.0) == 0);
        CHECK(quantize8(7.0) == 255);
    }
    SUBCASE("comments in the header are tolerated") {
        std::string p = s.path("comments.ppm");
        write_file(p, "P6\n# a comment\n2 1\n255\n" + std::string(6, '\x40'));
        Tensor img = image_read(p);
        CHECK(img.shape() == std::vector<int>{2, 1, 3});
        CHECK(img.at(0, 0, 0) == doctest::Approx(0x40 / 255.0));
    }
    SUBCASE("bad magic and truncation fail with diagnostics") {
        write_file(s.path("bad.ppm"), "P5\n2 2\n255\n....");
        CHECK_THROWS_AS(image_read(s.path("bad.ppm")), IoError);

        write_file(s.path("short.ppm"), "P6\n4 4\n255\n0123");
        try {
            image_read(s.path("short.ppm"));
            FAIL("expected IoError");
        } catch (const IoError& e) {
            // the diagnostic reports expected vs actual byte counts
            CHECK(std::string(e.what()).find("48") != std::string::npos);
            CHECK(std::string(e.what()).find("4") != std::string::npos);
        }
    }
}

TEST_CASE("cmd_train") {
    Scratch s;
    SUBCASE("missing config file names the path and exits 2") {
        std::ostringstream log;
        int code = cmd_train(s.path("nope.cfg"), std::nullopt, log);
        CHECK(code == 2);
        CHECK(log.str().find(s.path("nope.cfg")) != std::string::npos);
    }
    SUBCASE("a zero-iteration run checkpoints the initialization") {
        std::string text = std::string(kTinyConfig) + "train.iterations = 0\n" +
                           "io.checkpoint = " + s.path("init.cbmx") + "\n" +
                           "io.metrics = " + s.path("m.csv") + "\n";
        write_file(s.path("zero.cfg"), text);
        std::ostringstream log;
        REQUIRE(cmd_train(s.path("zero.cfg"), std::nullopt, log) == 0);

        NetworkConfig cfg;
        cfg.path_sizes = {{8, 8}, {4, 4}};
        cfg.blocks_per_path = 1;
        NetworkParams expected = init_network(cfg, Ablation::full, 32, 32, 3);
        NetworkParams loaded = checkpoint_load(s.path("init.cbmx"));
        REQUIRE(loaded.table.count() == expected.table.count());
        for (int i = 0; i < expected.table.count(); ++i)
            for (std::size_t j = 0; j < expected.table.value(i).numel(); ++j)
                CHECK(loaded.table.value(i)[j] ==
                      static_cast<double>(static_cast<float>(expected.table.value(i)[j])));
    }
    SUBCASE("reruns with the same seed reproduce the metrics CSV byte-identically") {
        std::string c1 = tiny_config_with_io(s, "r1");
        std::string c2 = tiny_config_with_io(s, "r2");
        std::ostringstream log1, log2;
        REQUIRE(cmd_train(c1, std::nullopt, log1) == 0);
        REQUIRE(cmd_train(c2, std::nullopt, log2) == 0);
        std::string m1 = read_file(s.path("r1_metrics.csv"));
        CHECK(m1 == read_file(s.path("r2_metrics.csv")));
        CHECK(m1.substr(0, m1.find('\n')) == "iteration,loss,l1,perceptual,psnr_val,ssim_val");
        // seed override changes the run
        std::string c3 = tiny_config_with_io(s, "r3");
        std::ostringstream log3;
        REQUIRE(cmd_train(c3, 99, log3) == 0);
        CHECK(m1 != read_file(s.path("r3_metrics.csv")));
    }
}

TEST_CASE("cmd_infer") {
    Scratch s;
    NetworkParams net = identity_network();
    checkpoint_save(s.path("id.cbmx"), net);

    Rng rng(23);
    Tensor img({24, 20, 3});
    for (std::size_t i = 0; i < img.numel(); ++i)
        img[i] = static_cast<double>(rng.next_index(256)) / 255.0;
    image_write(s.path("in.ppm"), img);

    SUBCASE("identity checkpoint reproduces the input up to quantization") {
        std::ostringstream log;
        REQUIRE(cmd_infer(s.path("id.cbmx"), s.path("in.ppm"), s.path("out.ppm"), log) == 0);
        CHECK(read_file(s.path("out.ppm")) == read_file(s.path("in.ppm")));
    }
    SUBCASE("inference is deterministic and preserves dimensions") {
        std::ostringstream log;
        REQUIRE(cmd_infer(s.path("id.cbmx"), s.path("in.ppm"), s.path("o1.ppm"), log) == 0);
        REQUIRE(cmd_infer(s.path("id.cbmx"), s.path("in.ppm"), s.path("o2.ppm"), log) == 0);
        CHECK(read_file(s.path("o1.ppm")) == read_file(s.path("o2.ppm")));
        Tensor out = image_read(s.path("o1.ppm"));
        CHECK(out.shape() == img.shape());
    }
    SUBCASE("missing checkpoint exits 2") {
        std::ostringstream log;
        CHECK(cmd_infer(s.path("missing.cbmx"), s.path("in.ppm"), s.path("x.ppm"), log) == 2);
    }
}

TEST_CASE("cmd_eval") {
    Scratch s;
    NetworkParams net = identity_network();
    checkpoint_save(s.path("id.cbmx"), net);

    fs::create_directories(s.path("pairs"));
    Rng rng(31);
    for (int i = 0; i < 3; ++i) {
        Tensor sharp = synthetic_sharp_image(24, 24, rng);
        // degenerate set: the blurry input IS the sharp image
        image_write(s.path("pairs") + "/img" + std::to_string(i) + "_blurry.ppm", sharp);
        image_write(s.path("pairs") + "/img" + std::to_string(i) + "_sharp.ppm", sharp);
    }

    SUBCASE("sharp-as-input summary reports SSIM 1.000") {
        std::ostringstream log;
        REQUIRE(cmd_eval(s.path("id.cbmx"), s.path("pairs"), s.path("eval.csv"), log) == 0);
        INFO(log.str());
        CHECK(log.str().find("SSIM=1") != std::string::npos);

        // row per pair, summary equals the column means
        std::string csv = read_file(s.path("eval.csv"));
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "image_id,psnr,ssim");
        int rows = 0;
        double ssim_sum = 0.0;
        while (std::getline(lines, line)) {
            ++rows;
            std::size_t c2 = line.rfind(',');
            ssim_sum += std::stod(line.substr(c2 + 1));
        }
        CHECK(rows == 3);
        double mean_from_log = std::stod(log.str().substr(log.str().find("SSIM=") + 5));
        CHECK(std::abs(ssim_sum / 3.0 - mean_from_log) < 1e-9);
    }
    SUBCASE("empty dataset dir exits 2") {
        fs::create_directories(s.path("empty"));
        std::ostringstream log;
        CHECK(cmd_eval(s.path("id.cbmx"), s.path("empty"), s.path("x.csv"), log) == 2);
    }
}

TEST_CASE("cmd_ablate") {
    Scratch s;
    SUBCASE("one CSV row per enabled variant, shared dataset hash logged") {
        std::string cfg_path = tiny_config_with_io(s, "ab");
        std::ostringstream log;
        REQUIRE(cmd_ablate(cfg_path, std::nullopt, log) == 0);
        std::string csv = read_file(s.path("ab_ablate.csv"));
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "variant,psnr,ssim");
        std::vector<std::string> variants;
        while (std::getline(lines, line)) variants.push_back(line.substr(0, line.find(',')));
        CHECK(variants == std::vector<std::string>{"full", "d-real", "d-imag", "wo-ms", "wo-ss", "wo-lfe"});

        // the dataset hash is logged once per variant and is identical
        std::string text = log.str();
        std::string first_hash;
        int hash_count = 0;
        std::istringstream loglines(text);
        while (std::getline(loglines, line)) {
            std::size_t pos = line.find("dataset_hash=");
            if (pos == std::string::npos) continue;
            std::string h = line.substr(pos + 13);
            ++hash_count;
            if (first_hash.empty())
                first_hash = h;
            else
                CHECK(h == first_hash);
        }
        CHECK(hash_count == 6);
    }
    SUBCASE("the full model is included even when not requested") {
        std::string text = std::string(kTinyConfig) + "ablate.variants = d-real\n" +
                           "io.ablate = " + s.path("small_ablate.csv") + "\n" +
                           "io.checkpoint = " + s.path("x.cbmx") + "\n" +
                           "io.metrics = " + s.path("x.csv") + "\n";
        write_file(s.path("small.cfg"), text);
        std::ostringstream log;
        REQUIRE(cmd_ablate(s.path("small.cfg"), std::nullopt, log) == 0);
        std::string csv = read_file(s.path("small_ablate.csv"));
        CHECK(csv.find("full,") != std::string::npos);
        CHECK(csv.find("d-real,") != std::string::npos);
    }
}

TEST_CASE("cmd_spectrum") {
    Scratch s;
    SUBCASE("all requested planes are written") {
        Rng rng(37);
        Tensor img = synthetic_sharp_image(16, 16, rng);
        image_write(s.path("in.ppm"), img);
        std::ostringstream log;
        REQUIRE(cmd_spectrum(s.path("in.ppm"), s.path("spec"), "", log) == 0);
        for (const char* suffix : {"_real.ppm", "_imag.ppm", "_magnitude.ppm", "_phase.ppm"})
            CHECK(fs::exists(s.path(std::string("spec") + suffix)));
    }
    SUBCASE("constant input renders a single bright center pixel") {
        Tensor img = Tensor::full({16, 16, 3}, 0.5);
        image_write(s.path("const.ppm"), img);
        std::ostringstream log;
        REQUIRE(cmd_spectrum(s.path("const.ppm"), s.path("dc"), "", log) == 0);
        Tensor mag = image_read(s.path("dc_magnitude.ppm"));
        for (int x = 0; x < 16; ++x)
            for (int y = 0; y < 16; ++y) {
                double expect = (x == 8 && y == 8) ? 1.0 : 0.0;
                CHECK(mag.at(x, y, 0) == expect);
            }
    }
    SUBCASE("phase images match the in-process rendering, shifted input included") {
        Rng rng(41);
        Tensor img = synthetic_sharp_image(16, 16, rng);
        Tensor shifted({16, 16, 3});
        for (int x = 0; x < 16; ++x)
            for (int y = 0; y < 16; ++y)
                for (int c = 0; c < 3; ++c) shifted.at(x, y, c) = img.at((x + 3) % 16, y, c);
        image_write(s.path("a.ppm"), img);
        image_write(s.path("b.ppm"), shifted);
        std::ostringstream log;
        REQUIRE(cmd_spectrum(s.path("a.ppm"), s.path("pa"), "", log) == 0);
        REQUIRE(cmd_spectrum(s.path("b.ppm"), s.path("pb"), "", log) == 0);

        auto phase_render = [](const Tensor& t) {
            Tensor p = phase_spectrum(fft2(t));
            Tensor out(p.shape());
            const double pi = 3.14159265358979323846;
            for (std::size_t i = 0; i < p.numel(); ++i) out[i] = (p[i] + pi) / (2.0 * pi);
            return out;
        };
        // CLI output equals the library rendering bit-for-bit after quantization
        Tensor pa = image_read(s.path("pa_phase.ppm"));
        Tensor pb = image_read(s.path("pb_phase.ppm"));
        Tensor ra = phase_render(image_read(s.path("a.ppm")));
        Tensor rb = phase_render(image_read(s.path("b.ppm")));
        for (std::size_t i = 0; i < pa.numel(); ++i) {
            CHECK(quantize8(ra[i]) == quantize8(pa[i]));
            CHECK(quantize8(rb[i]) == quantize8(pb[i]));
        }
        // and the shift visibly changes the phase image
        CHECK(max_abs_diff(pa, pb) > 0.1);
    }
    SUBCASE("per-block spectra appear with a checkpoint") {
        NetworkParams net = identity_network();
        checkpoint_save(s.path("id.cbmx"), net);
        Rng rng(43);
        Tensor img = synthetic_sharp_image(16, 16, rng);
        image_write(s.path("in.ppm"), img);
        std::ostringstream log;
        REQUIRE(cmd_spectrum(s.path("in.ppm"), s.path("blk"), s.path("id.cbmx"), log) == 0);
        CHECK(fs::exists(s.path("blk_block1.ppm")));
    }
    SUBCASE("unreadable image exits 2") {
        std::ostringstream log;
        CHECK(cmd_spectrum(s.path("missing.ppm"), s.path("x"), "", log) == 2);
    }
}

TEST_CASE("thread cap and threaded determinism") {
    SUBCASE("CUBEMIX_THREADS parses and validates") {
        ::unsetenv("CUBEMIX_THREADS");
        CHECK(thread_cap_from_env() == 1);
        ::setenv("CUBEMIX_THREADS", "3", 1);
        CHECK(thread_cap_from_env() == 3);
        ::setenv("CUBEMIX_THREADS", "zero", 1);
        CHECK_THROWS_AS(thread_cap_from_env(), ConfigError);
        ::setenv("CUBEMIX_THREADS", "0", 1);
        CHECK_THROWS_AS(thread_cap_from_env(), ConfigError);
        ::unsetenv("CUBEMIX_THREADS");
    }
    SUBCASE("threaded batches reproduce the sequential run bit-for-bit") {
        Dataset data = make_synthetic_dataset(32, 4, 1, 51);
        NetworkConfig nc;
        nc.path_sizes = {{8, 8}, {4, 4}};
        nc.blocks_per_path = 1;
        TrainConfig tc;
        tc.iterations = 3;
        tc.batch_size = 4;
        tc.eval_every = 1;
        tc.seed = 51;

        NetworkParams n1 = init_network(nc, Ablation::full, 32, 32, 51);
        TrainLog l1 = train_loop(tc, data, n1);
        tc.threads = 4;
        NetworkParams n2 = init_network(nc, Ablation::full, 32, 32, 51);
        TrainLog l2 = train_loop(tc, data, n2);
        CHECK(l1.to_csv() == l2.to_csv());
        for (int i = 0; i < n1.table.count(); ++i)
            CHECK(bit_identical(n1.table.value(i), n2.table.value(i)));
    }
}
