#include <benchmark/benchmark.h>

#include "tg/admissibility.hpp"
#include "tg/liouville.hpp"

namespace {

tg::Exec exec_of(const benchmark::State& state) { return state.range(0) ? tg::Exec::parallel : tg::Exec::serial; }

void census(benchmark::State& state) {
    const tg::GreenFunction green(tg::LatticeBasis(1.0, tg::cplx(0.5, 0.9)));
    tg::CensusOptions options;
    options.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(tg::find_critical_points(green, options).count);
}

void d_functional(benchmark::State& state) {
    const tg::GreenFunction green(tg::LatticeBasis(1.0, tg::cplx(0.5, 0.9)));
    tg::SingularQuadratureSettings settings;
    settings.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(tg::d_functional(0.5, green, settings).value);
}

void shoot_masses(benchmark::State& state) {
    std::vector<tg::ShotParameters> shots;
    for (int n = 0; n < 16; ++n) {
        const double c1 = 0.5 + 0.1 * n;
        shots.push_back({c1, 1.0, 0.0, std::log(c1) + 0.01 * (n % 5)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(tg::shoot_masses(shots, {}, exec_of(state)).size());
}

}  // namespace

BENCHMARK(census)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(d_functional)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(shoot_masses)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
