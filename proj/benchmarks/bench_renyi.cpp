#include <benchmark/benchmark.h>

#include "renyi/counterexample.hpp"
#include "renyi/eatrate.hpp"
#include "renyi/linalg.hpp"
#include "renyi/random.hpp"

using namespace renyi;

static void BM_HermitianEig(benchmark::State& state) {
    Rng rng(1);
    const auto rho = random_density({static_cast<std::size_t>(state.range(0))}, 0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig(rho.matrix));
}
BENCHMARK(BM_HermitianEig)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_SandwichedDivergence(benchmark::State& state) {
    Rng rng(2);
    const std::size_t d = state.range(0);
    const auto rho = random_density({d}, 0, rng);
    const auto sigma = random_density({d}, 0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(renyi_divergence(rho.matrix, sigma.matrix, 1.5));
}
BENCHMARK(BM_SandwichedDivergence)->Arg(4)->Arg(8)->Arg(16);

static void BM_HUpQuantumConditioning(benchmark::State& state) {
    Rng rng(3);
    const std::size_t dc = state.range(0);
    const auto rho = random_cq({}, {2, dc}, {"A", "C"}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(h_up(rho, {"A"}, {"C"}, 2.0));
}
BENCHMARK(BM_HUpQuantumConditioning)->Arg(2)->Arg(4)->Arg(8);

static void BM_HPartial(benchmark::State& state) {
    Rng rng(4);
    const auto rho = random_cq({{"B", static_cast<std::size_t>(state.range(0))}}, {2, 4}, {"A", "C"}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(h_partial(rho, {"A"}, {"B"}, {"C"}, 1.5));
}
BENCHMARK(BM_HPartial)->Arg(2)->Arg(4);

static void BM_InnerInfimum(benchmark::State& state) {
    auto cs = ConstraintSet::full(3);
    cs.at_least(1, 0.04);
    const Distribution p{0.01, 0.04, 0.95};
    for (auto _ : state) benchmark::DoNotOptimize(inner_inf_v(p, 0.9, cs, 1.5, 2));
}
BENCHMARK(BM_InnerInfimum);

static void BM_SingleRound(benchmark::State& state) {
    const auto proto = chsh_protocol(0.05);
    auto cs = ConstraintSet::full(proto.score_alphabet());
    cs.at_least(1, 0.05 * 0.84);
    const auto s = tsirelson_strategy();
    for (auto _ : state) benchmark::DoNotOptimize(single_round_h(s, proto, cs, 1.5));
}
BENCHMARK(BM_SingleRound);

static void BM_CounterexampleReport(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(ce_report(1.5));
}
BENCHMARK(BM_CounterexampleReport);

BENCHMARK_MAIN();
