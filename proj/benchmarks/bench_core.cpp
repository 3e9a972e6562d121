#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fexpbayes/autocov.hpp"
#include "fexpbayes/divergences.hpp"
#include "fexpbayes/posterior.hpp"
#include "fexpbayes/rng.hpp"
#include "fexpbayes/simulate.hpp"
#include "fexpbayes/toeplitz.hpp"

using namespace fexpbayes;

namespace {

const FexpParams& bench_params() {
    static const FexpParams p(0.3, {-std::log(2.0 * std::numbers::pi), 0.2, -0.1});
    return p;
}

std::vector<double> bench_series(std::size_t n) {
    SimRequest req;
    req.n = n;
    req.replicates = 1;
    req.seed = 42;
    const SimResult sim = simulate_gaussian(SpectralFn::fexp(bench_params()), req);
    return {sim.row(0).begin(), sim.row(0).end()};
}

}  // namespace

static void BM_AutocovAnalytic(benchmark::State& state) {
    const std::size_t n = state.range(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(autocov_analytic(bench_params(), n));
    state.SetComplexityN(n);
}
BENCHMARK(BM_AutocovAnalytic)->Range(64, 2048)->Complexity();

static void BM_LevinsonFactor(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const AutocovSeq acov = autocov_analytic(bench_params(), n);
    for (auto _ : state)
        benchmark::DoNotOptimize(ToeplitzSolver::factor(acov));
    state.SetComplexityN(n);
}
BENCHMARK(BM_LevinsonFactor)->Range(64, 2048)->Complexity();

static void BM_GaussLoglik(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const AutocovSeq acov = autocov_analytic(bench_params(), n);
    const std::vector<double> x = bench_series(n);
    for (auto _ : state)
        benchmark::DoNotOptimize(gauss_loglik(acov, x));
    state.SetComplexityN(n);
}
BENCHMARK(BM_GaussLoglik)->Range(64, 2048)->Complexity();

static void BM_ToeplitzMatvec(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const AutocovSeq acov = autocov_analytic(bench_params(), n);
    const std::vector<double> x = bench_series(n);
    for (auto _ : state)
        benchmark::DoNotOptimize(toeplitz_matvec(acov, x));
    state.SetComplexityN(n);
}
BENCHMARK(BM_ToeplitzMatvec)->Range(64, 4096)->Complexity();

static void BM_TraceRatioExact(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const SpectralFn f = SpectralFn::fexp(bench_params());
    const SpectralFn g = SpectralFn::fexp(FexpParams(0.25, {-1.8, 0.1}));
    for (auto _ : state)
        benchmark::DoNotOptimize(trace_ratio(f, g, n));
}
BENCHMARK(BM_TraceRatioExact)->Arg(64)->Arg(128)->Arg(256);

static void BM_TraceRatioStochastic(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const SpectralFn f = SpectralFn::fexp(bench_params());
    const SpectralFn g = SpectralFn::fexp(FexpParams(0.25, {-1.8, 0.1}));
    for (auto _ : state)
        benchmark::DoNotOptimize(trace_ratio(f, g, n, TraceMode::stochastic, 32, 1));
}
BENCHMARK(BM_TraceRatioStochastic)->Arg(256)->Arg(1024);

static void BM_SimulateCirculant(benchmark::State& state) {
    const std::size_t n = state.range(0);
    SimRequest req;
    req.n = n;
    req.replicates = 8;
    req.seed = 7;
    req.method = SimMethod::circulant;
    const SpectralFn f = SpectralFn::fexp(bench_params());
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_gaussian(f, req));
}
BENCHMARK(BM_SimulateCirculant)->Arg(256)->Arg(1024);

static void BM_PosteriorSweeps(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const std::vector<double> x = bench_series(n);
    PriorSpec prior;
    SamplerConfig cfg;
    cfg.iterations = 50;
    cfg.burn_in = 10;
    cfg.thin = 1;
    cfg.seed = 3;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_mcmc(x, prior, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_PosteriorSweeps)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
