#include <benchmark/benchmark.h>

#include <cubemix/loss.hpp>
#include <cubemix/network.hpp>
#include <cubemix/spectral.hpp>

using namespace cubemix;

namespace {

Tensor random_image(int w, int h, int c, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t({w, h, c});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.next_double();
    return t;
}

void BM_fft2(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    Tensor x = random_image(n, n, 3, 1);
    for (auto _ : state) {
        SpectralPlanes s = fft2(x);
        benchmark::DoNotOptimize(s.real.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.numel()));
}
BENCHMARK(BM_fft2)->Arg(24)->Arg(32)->Arg(64)->Arg(128);

void BM_mixer_block(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    ParamTable table;
    Rng rng(2);
    MixerBlockParams block = init_mixer_block(table, "b", n, n, 3, 1.0, rng);
    Tensor x = random_image(n, n, 3, 3);
    for (auto _ : state) {
        Tape tape;
        std::vector<Var> vars = table.bind(tape);
        Var out = mixer_block(tape.leaf(x), block, vars);
        benchmark::DoNotOptimize(out.value().data());
    }
}
BENCHMARK(BM_mixer_block)->Arg(12)->Arg(24)->Arg(48);

void BM_conv2d_3x3(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    Rng rng(5);
    Tensor x = random_image(n, n, 12, 5);
    Tensor k({3, 3, 12, 12});
    for (std::size_t i = 0; i < k.numel(); ++i) k[i] = rng.uniform(-0.1, 0.1);
    Tensor b({12});
    for (auto _ : state) {
        Tape tape;
        Var out = conv2d(tape.leaf(x), tape.leaf(k), tape.leaf(b));
        benchmark::DoNotOptimize(out.value().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n * 9 * 12 * 12);
}
BENCHMARK(BM_conv2d_3x3)->Arg(96)->Arg(192);

void BM_deblur_forward(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    NetworkConfig cfg;
    cfg.path_sizes = {{24, 24}, {12, 12}, {6, 6}};
    NetworkParams net = init_network(cfg, Ablation::full, n, n, 7);
    Tensor x = random_image(n, n, 3, 7);
    for (auto _ : state) {
        Tensor out = deblur_infer(x, net);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_deblur_forward)->Arg(96)->Arg(192);

void BM_train_step(benchmark::State& state) {
    NetworkConfig cfg;
    cfg.path_sizes = {{24, 24}, {12, 12}, {6, 6}};
    NetworkParams net = init_network(cfg, Ablation::full, 96, 96, 9);
    Tensor blurry = random_image(96, 96, 3, 11);
    Tensor sharp = random_image(96, 96, 3, 13);
    for (auto _ : state) {
        Tape tape;
        std::vector<Var> vars = net.table.bind(tape);
        Var pred = deblur_forward(tape.leaf(blurry), net, vars);
        LossParts parts = total_loss(pred, tape.leaf(sharp), 0.03);
        tape.backward(parts.total.id);
        benchmark::DoNotOptimize(tape.adjoint(vars[0].id).data());
    }
}
BENCHMARK(BM_train_step);

} // namespace

BENCHMARK_MAIN();
