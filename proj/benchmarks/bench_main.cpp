#include <benchmark/benchmark.h>

#include <kcut/analysis.hpp>
#include <kcut/graphcut.hpp>
#include <kcut/kernel_bound.hpp>
#include <kcut/knn.hpp>
#include <kcut/pipeline.hpp>

#include <random>

using namespace kcut;

namespace {

Mat uniform_points(int n, int dim, std::uint64_t seed) {
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> u(0, 1);
    Mat X(n, dim);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(r);
    return X;
}

}  // namespace

// 4-connected grid with random terminals and unit smoothness
static void BM_GridMaxflow(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    std::mt19937_64 r(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> t(side * side);
    for (double& v : t) v = u(r);
    for (auto _ : state) {
        FlowGraph g(side * side);
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                int p = y * side + x;
                g.add_terminal(p, std::max(t[p], 0.0), std::max(-t[p], 0.0));
                if (x + 1 < side) g.add_edge(p, p + 1, 0.3, 0.3);
                if (y + 1 < side) g.add_edge(p, p + side, 0.3, 0.3);
            }
        benchmark::DoNotOptimize(g.maxflow());
    }
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_GridMaxflow)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_KnnLists(benchmark::State& state) {
    Mat X = uniform_points(static_cast<int>(state.range(0)), 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(knn_lists(X, 10));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnLists)->Arg(1000)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

static void BM_KernelBound(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Dataset d = Dataset::from_features(uniform_points(n, 3, 3));
    Affinity A = build_affinity(d, KernelPolicy::parse("knn:10"));
    ConcaveSurrogate s = build_surrogate(Objective::NC, A);
    std::mt19937_64 r(4);
    Labeling St(std::vector<int>(n), 4);
    for (int p = 0; p < n; ++p) St[p] = static_cast<int>(r() % 4);
    for (auto _ : state) benchmark::DoNotOptimize(taylor_unary_bound(s, St));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KernelBound)->Arg(1000)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

static void BM_KernelCutSegmentation(benchmark::State& state) {
    CamouflageParams cp;
    cp.height = cp.width = static_cast<int>(state.range(0));
    SyntheticImage img = camouflage_image(cp, 5);
    FeatureOptions fo;
    fo.color = ColorSpace::Rgb;
    Dataset feats = image_features(img.image.features, *img.image.grid, fo);
    SegmentParams prm;
    prm.kernel = KernelPolicy::parse("knn:20");
    prm.gamma = 0.5;
    std::vector<int> hard(feats.n(), -1);
    const double W = cp.width - 1, H = cp.height - 1;
    rasterize_stroke(hard, *feats.grid, {{0, 0}, {W, 0}, {W, H}, {0, H}, {0, 0}}, 1.0, 0);
    rasterize_stroke(hard, *feats.grid, {{W / 2 - 2, H / 2}, {W / 2 + 2, H / 2}}, 1.0, 1);
    SegmentationProblem sp = build_segmentation(feats, prm, hard);
    Labeling init = seeded_init(feats, hard, 2, 0);
    for (auto _ : state) benchmark::DoNotOptimize(kernel_cut(sp.spec, init));
    state.SetItemsProcessed(state.iterations() * feats.n());
}
BENCHMARK(BM_KernelCutSegmentation)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
