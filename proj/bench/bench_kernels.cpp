// Serial reference loops against their OpenMP counterparts on the MB example.

#include <memory>
#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "supertheta/pipeline.hpp"

namespace {

struct Setup {
    st::Problem P;
    std::unique_ptr<st::Prepared> prep;

    Setup() : P(st::build_problem(st::load_config(std::string(SUPERTHETA_CONFIG_DIR) + "/mb_p3.json"))) {
        std::mt19937_64 rng(1);
        prep = std::make_unique<st::Prepared>(st::prepare(P, rng));
        prep->P = &P;
    }
};

Setup& setup() {
    static Setup s;
    return s;
}

void BM_ThetaTable(benchmark::State& state) {
    const bool parallel = state.range(0) != 0;
    st::ThetaKernel K(*setup().prep, static_cast<size_t>(state.range(1)));
    for (auto _ : state) {
        auto t = parallel ? st::theta_table_parallel(K) : st::theta_table_serial(K);
        benchmark::DoNotOptimize(t.v.data());
    }
    state.SetLabel(parallel ? "openmp" : "serial");
}
BENCHMARK(BM_ThetaTable)->ArgsProduct({{0, 1}, {64, 128}})->Unit(benchmark::kMillisecond);

void BM_SquaresRoute(benchmark::State& state) {
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) {
        std::mt19937_64 rng(1);
        auto r = st::squares_route(*setup().prep, rng, 64, parallel);
        benchmark::DoNotOptimize(r.q2.q.data());
    }
    state.SetLabel(parallel ? "openmp" : "serial");
}
BENCHMARK(BM_SquaresRoute)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Prepare(benchmark::State& state) {
    for (auto _ : state) {
        std::mt19937_64 rng(1);
        auto p = st::prepare(setup().P, rng);
        benchmark::DoNotOptimize(p.rho_H.data());
    }
}
BENCHMARK(BM_Prepare)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
