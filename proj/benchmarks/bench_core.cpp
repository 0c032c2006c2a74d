#include <benchmark/benchmark.h>

#include "triscale/integrate.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"

using namespace triscale;

static void BM_VectorField(benchmark::State& state) {
    const Params p = Params::preset_paper(0.75, 0.01);
    const State s{0.3, 0.12, 0.2};
    for (auto _ : state) {
        auto f = vector_field(s, p, Frame::Fast);
        benchmark::DoNotOptimize(f);
    }
}
BENCHMARK(BM_VectorField);

static void BM_Jacobian(benchmark::State& state) {
    const Params p = Params::preset_paper(0.75, 0.01);
    const State s{0.3, 0.12, 0.2};
    for (auto _ : state) {
        auto J = jacobian(s, p, Frame::Fast);
        benchmark::DoNotOptimize(J);
    }
}
BENCHMARK(BM_Jacobian);

static void BM_SimulateShort(benchmark::State& state) {
    const Params p = Params::preset_paper(0.8, 0.0245);
    IntegratorConfig cfg;
    cfg.scheme = state.range(0) == 0 ? Scheme::Explicit : Scheme::Implicit;
    for (auto _ : state) {
        Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 50.0, cfg);
        benchmark::DoNotOptimize(tr.t.size());
    }
}
BENCHMARK(BM_SimulateShort)->Arg(0)->Arg(1);

static void BM_FoldClassify(benchmark::State& state) {
    const Params p = Params::preset_paper(0.6, 0.025);
    for (auto _ : state) {
        auto fc = fold_parametrization(p);
        benchmark::DoNotOptimize(fc.case_label);
    }
}
BENCHMARK(BM_FoldClassify);

BENCHMARK_MAIN();
