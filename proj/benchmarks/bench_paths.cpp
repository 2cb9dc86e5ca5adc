#include <filesystem>
#include <random>

#include <benchmark/benchmark.h>

#include <dualgraph/breadth_graph.hpp>
#include <dualgraph/depth_graph.hpp>
#include <dualgraph/graph_io.hpp>
#include <dualgraph/pipeline.hpp>
#include <dualgraph/query.hpp>
#include <dualgraph/trace.hpp>

namespace {

std::filesystem::path fixture(const char* name) { return std::filesystem::path(DUALGRAPH_FIXTURE_DIR) / name; }

// Ring plus random chords; every node is a seed.
dgr::BreadthGraph chorded_ring(std::size_t n) {
    std::mt19937_64 rng(11);
    std::vector<dgr::BreadthNode> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "ent:n" + std::to_string(i);
        nodes.push_back({id, dgr::BreadthNodeKind::entity, id, "node " + std::to_string(i % 17), std::nullopt});
    }
    std::vector<dgr::BreadthEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        edges.push_back({nodes[i].id, nodes[(i + 1) % n].id, dgr::BreadthRelation::mentions, 0.6});
        edges.push_back({nodes[i].id, nodes[rng() % n].id, dgr::BreadthRelation::cites, 0.8});
    }
    std::erase_if(edges, [](const dgr::BreadthEdge& e) { return e.src == e.dst; });
    return {nodes, edges};
}

void BM_BreadthEnumeration(benchmark::State& state) {
    const auto g = chorded_ring(static_cast<std::size_t>(state.range(0)));
    const dgr::HashingEmbedder emb(64);
    const dgr::BreadthEmbeddings e(g, emb);
    const auto query = emb.embed("node 3");
    const auto seeds = dgr::seed_nodes(g, e, query, 8);
    dgr::BreadthSearch search;
    search.max_length = 4;
    search.answers_of = [](std::size_t) { return std::vector<std::size_t>{}; };
    for (auto _ : state) benchmark::DoNotOptimize(dgr::enumerate_breadth_paths(g, e, seeds, query, search));
}
BENCHMARK(BM_BreadthEnumeration)->Range(16, 256);

void BM_DepthEnumeration(benchmark::State& state) {
    const auto g = dgr::build_depth_graph(dgr::parse_trace_file(fixture("land_grant.jsonl"))).graph;
    const auto max_len = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        for (std::size_t t = 0; t < g.nodes().size(); ++t) {
            benchmark::DoNotOptimize(dgr::enumerate_admissible_paths(g, t, max_len));
        }
    }
}
BENCHMARK(BM_DepthEnumeration)->DenseRange(1, 6);

void BM_EngineRun(benchmark::State& state) {
    const auto trace = dgr::parse_trace_file(fixture("turing.jsonl"));
    const dgr::HashingEmbedder emb;
    const dgr::Engine engine(dgr::build_breadth_graph(trace), dgr::build_depth_graph(trace).graph, emb);
    const auto query = dgr::parse_query(dgr::read_file(fixture("turing.query.json")));
    for (auto _ : state) benchmark::DoNotOptimize(engine.run(query, dgr::HyperParams{}));
}
BENCHMARK(BM_EngineRun);

}  // namespace
