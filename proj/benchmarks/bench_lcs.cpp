#include <random>

#include <benchmark/benchmark.h>

#include <dualgraph/ops.hpp>

namespace {

dgr::OpSequence random_ops(std::mt19937_64& rng, std::size_t n) {
    static const char* units[] = {"acre", "acres", "person", "thousand_persons"};
    dgr::OpSequence ops(n);
    for (auto& op : ops) {
        op.op = static_cast<dgr::OpType>(rng() % 5);
        if (rng() % 2) op.unit = units[rng() % 4];
    }
    return ops;
}

void BM_LcsTyped(benchmark::State& state) {
    std::mt19937_64 rng(7);
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_ops(rng, n);
    const auto b = random_ops(rng, n);
    for (auto _ : state) benchmark::DoNotOptimize(dgr::lcs_typed(a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LcsTyped)->RangeMultiplier(2)->Range(2, 64)->Complexity(benchmark::oNSquared);

void BM_OpsFromText(benchmark::State& state) {
    const std::string text =
        "Look up the grant, normalize the units, compute the difference in acres and verify it.";
    for (auto _ : state) benchmark::DoNotOptimize(dgr::ops_from_text(text));
}
BENCHMARK(BM_OpsFromText);

}  // namespace
