// Microbenchmarks for the hot paths: convolution, wavelet transform, window
// attention, SSIM, and a full forward/backward step on a small model.

#include <benchmark/benchmark.h>

#include "lcdb/losses.hpp"
#include "lcdb/metrics.hpp"
#include "lcdb/networks.hpp"
#include "lcdb/ops.hpp"
#include "lcdb/wavelet.hpp"

#include <random>

using namespace lcdb;

namespace {

Tensor random_tensor(std::vector<long> shape, uint64_t seed, double lo = 0.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (long i = 0; i < t.numel(); ++i) t.data()[i] = u(rng);
    return t;
}

NetworkConfig small_config() {
    NetworkConfig n;
    n.base_channels_lan = 16;
    n.base_channels_crn = 16;
    n.lan_stages = 2;
    n.crn_wavelet_levels = 2;
    n.rcabs_per_level = 1;
    n.fn_channels = 32;
    n.fn_conv_layers = 2;
    n.window = 8;
    n.swin_blocks_per_glab = 1;
    return n;
}

void BM_Conv3x3(benchmark::State& state) {
    const long c = state.range(0);
    const Tensor x = random_tensor({1, c, 128, 128}, 1, -1.0, 1.0);
    const Tensor w = random_tensor({c, c, 3, 3}, 2, -0.1, 0.1);
    const Tensor b = Tensor::zeros({c});
    for (auto _ : state) benchmark::DoNotOptimize(ops::conv2d(x, w, b, 1, 1));
    state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(48);

void BM_Dwt2(benchmark::State& state) {
    const long size = state.range(0);
    Volume x(3, size, size);
    std::mt19937_64 rng(3);
    for (auto& v : x.v) v = (rng() % 1000) / 1000.0;
    for (auto _ : state) {
        const SubbandSet s = dwt2_level(x);
        benchmark::DoNotOptimize(s.ll.v.data());
    }
    state.SetItemsProcessed(state.iterations() * x.numel());
}
BENCHMARK(BM_Dwt2)->Arg(128)->Arg(512);

void BM_WindowAttention(benchmark::State& state) {
    ParamRegistry reg(5);
    WindowTransformerBlock blk(reg, "wt", 32, 8, 2, 0);
    const Tensor x = random_tensor({1, 32, 64, 64}, 7, -1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(blk.forward(x));
}
BENCHMARK(BM_WindowAttention);

void BM_Ssim(benchmark::State& state) {
    const long size = state.range(0);
    Plane a(size, size), b(size, size);
    std::mt19937_64 rng(11);
    for (long i = 0; i < size * size; ++i) {
        a.v[i] = (rng() % 1000) / 1000.0;
        b.v[i] = (rng() % 1000) / 1000.0;
    }
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(128)->Arg(256);

void BM_ForwardSmall(benchmark::State& state) {
    LcdbNet net(small_config(), 1);
    const Tensor x = random_tensor({1, 3, 64, 64}, 13);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_ForwardSmall);

void BM_ForwardBackwardSmall(benchmark::State& state) {
    LcdbNet net(small_config(), 1);
    const Tensor x = random_tensor({1, 3, 64, 64}, 13);
    const Tensor ref = random_tensor({1, 3, 64, 64}, 17);
    for (auto _ : state) {
        net.params().zero_grads();
        const ModelOutputs out = net.forward(x);
        LossBreakdown lb = joint_loss(out.sm_lum, out.sm_chrom, out.enhanced_ycc, ref);
        lb.total.backward();
        benchmark::DoNotOptimize(lb.total.item());
    }
}
BENCHMARK(BM_ForwardBackwardSmall);

}  // namespace

BENCHMARK_MAIN();
