// Microbenchmarks for the hot paths: convolution, vMF EM, the sliding-window
// likelihood map, the cut-selection solver and full decomposition.

#include <benchmark/benchmark.h>

#include <cmath>

#include "nucleo/decompose.hpp"
#include "nucleo/detect.hpp"
#include "nucleo/filter_bank.hpp"
#include "nucleo/mask.hpp"
#include "nucleo/rng.hpp"
#include "nucleo/synth.hpp"
#include "nucleo/vmf.hpp"

using namespace nucleo;

namespace {

GrayImage bench_image(int size) {
    SynthConfig cfg;
    cfg.width = cfg.height = size;
    cfg.count_min = cfg.count_max = std::max(2, size / 24);
    cfg.touching_prob = 0.2;
    cfg.seed = 7;
    return generate(cfg).image;
}

FilterBank bench_bank(int d) {
    FilterBank bank;
    bank.num_filters = d;
    bank.kernel_size = 5;
    bank.weights.resize(static_cast<std::size_t>(d) * 25);
    bank.bias.assign(d, 0.0);
    Rng rng(3);
    for (auto& w : bank.weights) w = rng.uniform(-1, 1);
    return bank;
}

VmfKernelBank bench_kernels(int K, int d) {
    Rng rng(5);
    VmfKernelBank bank;
    bank.K = K;
    bank.dim = d;
    bank.sigma = 30.0;
    bank.kernels.resize(static_cast<std::size_t>(K) * d);
    for (int k = 0; k < K; ++k) {
        double n2 = 0;
        for (int j = 0; j < d; ++j) {
            double v = rng.next_normal();
            bank.kernels[static_cast<std::size_t>(k) * d + j] = v;
            n2 += v * v;
        }
        for (int j = 0; j < d; ++j) bank.kernels[static_cast<std::size_t>(k) * d + j] /= std::sqrt(n2);
    }
    bank.background_index = 0;
    for (int k = 1; k < K; ++k) bank.foreground_indices.push_back(k);
    return bank;
}

CompositionalMixture bench_mixture(const VmfKernelBank& bank, int M, int P) {
    Rng rng(11);
    CompositionalMixture mix;
    mix.M = M;
    mix.patch_size = P;
    mix.K = bank.K;
    for (int m = 0; m < M; ++m) {
        std::vector<double> alpha(static_cast<std::size_t>(P) * P * bank.K);
        for (int i = 0; i < P * P; ++i) {
            double sum = 0;
            for (int k = 0; k < bank.K; ++k) {
                double v = 1e-4 + rng.next_double();
                alpha[static_cast<std::size_t>(i) * bank.K + k] = v;
                sum += v;
            }
            for (int k = 0; k < bank.K; ++k) alpha[static_cast<std::size_t>(i) * bank.K + k] /= sum;
        }
        mix.alphas.push_back(std::move(alpha));
        mix.nu.push_back(1.0 / M);
    }
    mix.refresh_fg_masks(bank);
    return mix;
}

void BM_Convolve(benchmark::State& state) {
    GrayImage img = bench_image(static_cast<int>(state.range(0)));
    FilterBank bank = bench_bank(32);
    for (auto _ : state) benchmark::DoNotOptimize(convolve_extract(img, bank));
}
BENCHMARK(BM_Convolve)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_VmfEmIteration(benchmark::State& state) {
    Rng rng(9);
    std::vector<std::vector<double>> data;
    for (int i = 0; i < state.range(0); ++i) {
        std::vector<double> v(32);
        double n2 = 0;
        for (auto& x : v) {
            x = rng.next_normal();
            n2 += x * x;
        }
        for (auto& x : v) x /= std::sqrt(n2);
        data.push_back(std::move(v));
    }
    for (auto _ : state) benchmark::DoNotOptimize(learn_vmf_kernels(data, 12, 30.0, 1));
}
BENCHMARK(BM_VmfEmIteration)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_LikelihoodMap(benchmark::State& state) {
    int size = static_cast<int>(state.range(0));
    GrayImage img = bench_image(size);
    FilterBank fb = bench_bank(32);
    FeatureMap fm = convolve_extract(img, fb);
    VmfKernelBank bank = bench_kernels(12, 32);
    CompositionalMixture mix = bench_mixture(bank, 20, 27);
    for (auto _ : state) benchmark::DoNotOptimize(likelihood_map(fm, mix, bank));
}
BENCHMARK(BM_LikelihoodMap)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CutSelection(benchmark::State& state) {
    Rng rng(13);
    std::vector<CutSelectionProblem> problems;
    for (int t = 0; t < 50; ++t) {
        CutSelectionProblem p;
        p.num_cuts = static_cast<int>(state.range(0));
        p.num_mutex = 10;
        p.weights.resize(p.num_cuts);
        for (auto& w : p.weights) w = rng.uniform(0.5, 10.0);
        p.A.assign(p.num_cuts, std::vector<std::uint8_t>(p.num_mutex, 0));
        for (int j = 0; j < p.num_mutex; ++j)
            for (int i = 0; i < p.num_cuts; ++i)
                if (rng.next_double() < 0.4) p.A[i][j] = 1;
        p.B.assign(p.num_cuts, std::vector<std::uint8_t>(p.num_cuts, 0));
        for (int i = 0; i < p.num_cuts; ++i)
            for (int j = i + 1; j < p.num_cuts; ++j)
                if (rng.next_double() < 0.3) p.B[i][j] = p.B[j][i] = 1;
        problems.push_back(std::move(p));
    }
    for (auto _ : state)
        for (const auto& p : problems) benchmark::DoNotOptimize(solve_cut_selection(p));
}
BENCHMARK(BM_CutSelection)->Arg(15)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
    // Two-disk dumbbell, the canonical touching-pair shape.
    int r = static_cast<int>(state.range(0));
    std::vector<std::uint8_t> fg;
    int w = 4 * r, h = 3 * r;
    fg.assign(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double d1 = std::hypot(x - 1.2 * r, y - 1.5 * r);
            double d2 = std::hypot(x - 2.8 * r, y - 1.5 * r);
            if (d1 <= r || d2 <= r) fg[static_cast<std::size_t>(y) * w + x] = 1;
        }
    PixelRegion blob = connected_components(w, h, fg, 4, 0).at(0);
    for (auto _ : state) benchmark::DoNotOptimize(decompose(blob, 3.0, 0.1));
}
BENCHMARK(BM_Decompose)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
