#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include <dualgraph/embedding.hpp>

namespace {

void BM_EmbedText(benchmark::State& state) {
    const std::string text(static_cast<std::size_t>(state.range(0)), 'a');
    std::string words;
    for (std::size_t i = 0; i < text.size() / 6; ++i) words += "token" + std::to_string(i % 50) + ' ';
    for (auto _ : state) benchmark::DoNotOptimize(dgr::embed_text(words));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(words.size()));
}
BENCHMARK(BM_EmbedText)->Range(64, 16384);

void BM_Cosine(benchmark::State& state) {
    const auto a = dgr::embed_text("busy beaver transition table");
    const auto b = dgr::embed_text("the machine halts after many steps");
    for (auto _ : state) benchmark::DoNotOptimize(dgr::cosine(a, b));
}
BENCHMARK(BM_Cosine);

}  // namespace
