#include "fsir/link.hpp"
#include "fsir/rkhs.hpp"
#include "fsir/simgen.hpp"
#include "fsir/sir.hpp"
#include "fsir/spectral.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace fsir;

static void BM_SymEigendecomp(benchmark::State& state) {
    const SymMatrix g = gram_matrix(KernelSpec::brownian(), unit_grid(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sym_eigendecomp(g));
}
BENCHMARK(BM_SymEigendecomp)->Arg(100)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_Fit(benchmark::State& state) {
    const SimOutput sim = gen_example1(100, state.range(0), 0.3, 1);
    FitOptions opts;
    opts.rank = 2;
    for (auto _ : state) benchmark::DoNotOptimize(fit(sim.dataset, opts));
}
BENCHMARK(BM_Fit)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

// One leave-one-out fold of cross-validation over k = 1..6.
static void BM_CvFold(benchmark::State& state) {
    const SimOutput sim = gen_example1(100, 100, 0.3, 2);
    std::vector<Index> train(99);
    std::iota(train.begin(), train.end(), Index{1});
    const Dataset d = sim.dataset.subset(train);
    const Matrix held = sim.dataset.x().topRows(1);
    for (auto _ : state) {
        const SirProblem problem(d, 10);
        for (Index k = 1; k <= 6; ++k) {
            const SirFit f = problem.fit(k, 1, false);
            const SmootherModel m = fit_smoother(f.xi_hat, d.y());
            benchmark::DoNotOptimize(predict_smoother(m, predict_indices(f, held)));
        }
    }
}
BENCHMARK(BM_CvFold)->Unit(benchmark::kMillisecond);

static void BM_CvExample1(benchmark::State& state) {
    const SimOutput sim = gen_example1(100, 100, 0.3, 3);
    CvOptions o;
    o.rank_grid = {1, 2, 3, 4, 5, 6};
    for (auto _ : state) benchmark::DoNotOptimize(cv_select_k(sim.dataset, o));
}
BENCHMARK(BM_CvExample1)->Unit(benchmark::kMillisecond);

static void BM_PredictSmoother(benchmark::State& state) {
    const SimOutput sim = gen_example1(state.range(0), 10, 0.3, 4);
    const SmootherModel m = fit_smoother(sim.xi_true, sim.dataset.y());
    for (auto _ : state) benchmark::DoNotOptimize(predict_smoother(m, sim.xi_true));
}
BENCHMARK(BM_PredictSmoother)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

static void BM_FgpSampler(benchmark::State& state) {
    const GaussianSampler sampler(gram_matrix(KernelSpec::fbm(0.75), unit_grid(120)));
    Rng rng(5);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_FgpSampler)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
