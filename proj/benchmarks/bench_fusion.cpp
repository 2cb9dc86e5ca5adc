#include <random>

#include <benchmark/benchmark.h>

#include <dualgraph/fusion.hpp>
#include <dualgraph/theorem.hpp>

namespace {

std::vector<std::string> answer_ids(std::size_t k) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < k; ++i) ids.push_back("a" + std::to_string(i));
    return ids;
}

void BM_AnswerDistribution(benchmark::State& state) {
    const auto ids = answer_ids(8);
    std::mt19937_64 rng(3);
    std::vector<dgr::ScoredPath> paths(static_cast<std::size_t>(state.range(0)));
    for (auto& p : paths) {
        p.answer = ids[rng() % ids.size()];
        p.score = -static_cast<double>(rng() % 1000) / 100.0;
    }
    for (auto _ : state) benchmark::DoNotOptimize(dgr::answer_distribution(paths, ids));
}
BENCHMARK(BM_AnswerDistribution)->Range(8, 4096);

void BM_FuseAndCalibrate(benchmark::State& state) {
    const auto ids = answer_ids(static_cast<std::size_t>(state.range(0)));
    std::vector<double> pb(ids.size()), pd(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        pb[i] = 1.0 + static_cast<double>(i);
        pd[i] = 1.0 + static_cast<double>(ids.size() - i);
    }
    auto normalize = [](std::vector<double> p) {
        double z = 0;
        for (double x : p) z += x;
        for (double& x : p) x /= z;
        return p;
    };
    const auto b = dgr::make_distribution(ids, normalize(pb));
    const auto d = dgr::make_distribution(ids, normalize(pd));
    for (auto _ : state) {
        const auto f = dgr::fuse_channels(b, d);
        benchmark::DoNotOptimize(dgr::calibrate(f.fused, 0.8, 0.0, f.h_breadth, f.h_depth));
    }
}
BENCHMARK(BM_FuseAndCalibrate)->Range(2, 256);

void BM_EstimateRisks(benchmark::State& state) {
    dgr::SyntheticScenario sc;
    sc.trials = 2000;
    for (auto _ : state) benchmark::DoNotOptimize(dgr::estimate_risks(sc, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_EstimateRisks)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace
