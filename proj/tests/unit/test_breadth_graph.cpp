#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include <dualgraph/breadth_graph.hpp>
#include <dualgraph/error.hpp>
#include <dualgraph/pipeline.hpp>
#include <dualgraph/query.hpp>
#include <dualgraph/graph_io.hpp>
#include <dualgraph/trace.hpp>

#include "test_support.hpp"

using namespace dgr;
using dgr_test::entity;
using dgr_test::TableEmbedder;

namespace {

TraceEvent artifact(std::string id, std::int64_t ts, std::string text,
                    std::vector<std::string> inputs = {}) {
    TraceEvent ev;
    ev.event_id = std::move(id);
    ev.run_id = "r";
    ev.timestamp = ts;
    ev.kind = EventKind::artifact;
    ev.text = std::move(text);
    ev.inputs = std::move(inputs);
    return ev;
}

std::size_t count_relation(const BreadthGraph& g, BreadthRelation r) {
    return std::count_if(g.edges().begin(), g.edges().end(),
                         [&](const BreadthEdge& e) { return e.relation == r; });
}

Vector v3(double x, double y, double z) { return Vector{{x, y, z}}; }

const nlohmann::json& goldens() {
    static const auto j = nlohmann::json::parse(dgr_test::slurp(dgr_test::golden("fixture_graphs.json")));
    return j;
}

}  // namespace

TEST_SUITE("breadth") {
    TEST_CASE("an empty trace builds an empty graph") {
        const BreadthGraph g = build_breadth_graph(Trace{"r", "q", {}});
        CHECK(g.nodes().empty());
        CHECK(g.edges().empty());
    }

    TEST_CASE("one artifact with two terms gives a span and two mentions") {
        const BreadthGraph g = build_breadth_graph(Trace{"r", "q", {artifact("a", 1, "[[A]] beside [[B]]")}});
        CHECK(g.nodes().size() == 3);
        CHECK(g.edges().size() == 2);
        CHECK(count_relation(g, BreadthRelation::mentions) == 2);
        CHECK(g.find("span:r/a").has_value());
        CHECK(g.find("ent:a").has_value());
        CHECK(g.find("ent:b").has_value());
    }

    TEST_CASE("fixture graphs match the reviewed golden counts") {
        for (const auto& [key, file] : {std::pair{"turing", "turing.jsonl"},
                                        std::pair{"land_grant", "land_grant.jsonl"}}) {
            const BreadthGraph g = build_breadth_graph(parse_trace_file(dgr_test::fixture(file)));
            CHECK(g.nodes().size() == goldens()[key]["breadth_nodes"].get<std::size_t>());
            CHECK(g.edges().size() == goldens()[key]["breadth_edges"].get<std::size_t>());
        }
    }

    TEST_CASE("definitions, symbols, aliases and support") {
        TraceEvent a = artifact("a", 1, "[[!TM two]] uses [[$q]]");
        a.value = std::string("TM two");
        TraceEvent check;
        check.event_id = "v";
        check.run_id = "r";
        check.timestamp = 2;
        check.kind = EventKind::validator;
        check.tool = "checker";
        check.op_type = OpType::verify;
        check.inputs = {"a"};
        TraceEvent check_fail = check;
        check_fail.event_id = "w";
        check_fail.status = EventStatus::fail;

        const BreadthGraph g = build_breadth_graph(Trace{"r", "q", {a, check, check_fail}},
                                                   AliasTable{{"TM two", "TM-2"}});
        const auto sym = g.find("sym:q");
        REQUIRE(sym.has_value());
        CHECK(g.nodes()[*sym].kind == BreadthNodeKind::symbol);
        CHECK(count_relation(g, BreadthRelation::defines) == 1);
        CHECK(count_relation(g, BreadthRelation::aliases) == 1);
        for (const auto& e : g.edges()) {
            if (e.relation == BreadthRelation::aliases) {
                CHECK(e.src == "ent:tm two");
                CHECK(e.dst == "ent:tm-2");
                CHECK(e.confidence == 0.9);
            }
            if (e.relation == BreadthRelation::supports) {
                CHECK(e.confidence == doctest::Approx(0.35));
            }
        }
        // One support edge per term of the validated artifact.
        CHECK(count_relation(g, BreadthRelation::supports) == 2);
    }

    TEST_CASE("parallel edges collapse to the strongest per relation") {
        const BreadthGraph g({entity("a"), entity("b")},
                             {{"a", "b", BreadthRelation::mentions, 0.3},
                              {"a", "b", BreadthRelation::mentions, 0.7},
                              {"a", "b", BreadthRelation::cites, 0.2}});
        REQUIRE(g.edges().size() == 2);
        CHECK(g.edges()[0].relation == BreadthRelation::mentions);
        CHECK(g.edges()[0].confidence == 0.7);
    }

    TEST_CASE("invalid graphs are rejected") {
        CHECK_THROWS_AS(BreadthGraph({entity("a")}, {{"a", "zz", BreadthRelation::mentions, 0.5}}), Error);
        CHECK_THROWS_AS(BreadthGraph({entity("a"), entity("b")}, {{"a", "b", BreadthRelation::mentions, 0.0}}), Error);
        CHECK_THROWS_AS(BreadthGraph({entity("a"), entity("a")}, {}), Error);
    }

    TEST_CASE("smoothing leaves isolated nodes and fixed points alone") {
        const TableEmbedder emb(3, {{"a", v3(1, 0, 0)}, {"b", v3(1, 0, 0)}, {"c", v3(0, 0.6, 0.8)}});
        const BreadthGraph g({entity("a"), entity("b"), entity("c")},
                             {{"a", "b", BreadthRelation::mentions, 1.0}});
        CHECK(smoothed_embedding(g, g.index_of("c"), emb) == v3(0, 0.6, 0.8));
        const Vector s = smoothed_embedding(g, g.index_of("a"), emb);
        CHECK(s.components[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(s.components[1]) < 1e-12);
    }

    TEST_CASE("star smoothing is the confidence-weighted mean") {
        const double r = 1.0 / std::sqrt(2.0);
        const TableEmbedder emb(3, {{"c", v3(1, 0, 0)}, {"u1", v3(0, 1, 0)}, {"u2", v3(0, 0, 1)},
                                    {"u3", v3(r, r, 0)}});
        const BreadthGraph g({entity("c"), entity("u1"), entity("u2"), entity("u3")},
                             {{"c", "u1", BreadthRelation::mentions, 0.5},
                              {"u2", "c", BreadthRelation::cites, 1.0},
                              {"c", "u3", BreadthRelation::aliases, 0.8},
                              {"c", "u3", BreadthRelation::mentions, 0.4}});
        // Strongest edge per neighbour: 0.5, 1.0, 0.8.
        double x = 1 + 0.8 * r, y = 0.5 + 0.8 * r, z = 1.0;
        const double n = std::sqrt(x * x + y * y + z * z);
        const Vector s = smoothed_embedding(g, g.index_of("c"), emb);
        CHECK(s.components[0] == doctest::Approx(x / n).epsilon(1e-12));
        CHECK(s.components[1] == doctest::Approx(y / n).epsilon(1e-12));
        CHECK(s.components[2] == doctest::Approx(z / n).epsilon(1e-12));
        CHECK(std::abs(s.norm() - 1.0) < 1e-9);
    }

    TEST_CASE("breadth score is one cosine against the smoothed vector") {
        const TableEmbedder emb(3, {{"a", v3(0, 1, 0)}, {"b", v3(0, 0, 1)}, {"c", v3(0.6, 0.8, 0)}});
        const BreadthGraph g({entity("a"), entity("b"), entity("c")},
                             {{"a", "c", BreadthRelation::mentions, 0.5}});
        const BreadthEmbeddings be(g, emb);
        CHECK(breadth_score(be, v3(0, 0, 1), g.index_of("b")) == doctest::Approx(1.0));
        CHECK(breadth_score(be, v3(1, 0, 0), g.index_of("b")) == 0.0);
        // a smoothed: (0,1,0) + 0.5 (0.6,0.8,0) = (0.3, 1.4, 0)
        const double expected = 0.3 / std::sqrt(0.3 * 0.3 + 1.4 * 1.4);
        CHECK(breadth_score(be, v3(1, 0, 0), g.index_of("a")) == doctest::Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("disconnected duplicates do not change a node's score") {
        const TableEmbedder emb(3, {{"a", v3(0, 1, 0)}, {"c", v3(0.6, 0.8, 0)}});
        const BreadthGraph g({entity("a"), entity("c")}, {{"a", "c", BreadthRelation::mentions, 0.5}});
        const BreadthGraph g2({entity("a"), entity("c"), entity("z", "a")},
                              {{"a", "c", BreadthRelation::mentions, 0.5}});
        const Vector q = v3(0.2, 0.3, 0.9);
        CHECK(breadth_score(BreadthEmbeddings(g, emb), q, g.index_of("a")) ==
              breadth_score(BreadthEmbeddings(g2, emb), q, g2.index_of("a")));
    }

    TEST_CASE("seed selection: exact match wins, ties go to the smaller id") {
        const HashingEmbedder emb;
        const BreadthGraph g({entity("n1", "busy beaver"), entity("n2", "halting problem"),
                              entity("n3", "turing machine"), entity("n0", "turing machine")},
                             {});
        const BreadthEmbeddings be(g, emb);
        const auto one = seed_nodes(g, be, emb.embed("halting problem"), 1);
        REQUIRE(one.size() == 1);
        CHECK(g.nodes()[one[0]].id == "n2");
        const auto two = seed_nodes(g, be, emb.embed("turing machine"), 2);
        CHECK(g.nodes()[two[0]].id == "n0");
        CHECK(g.nodes()[two[1]].id == "n3");
        CHECK(seed_nodes(g, be, emb.embed("x"), 10).size() == 4);
    }

    TEST_CASE("seed selection ignores node insertion order") {
        const HashingEmbedder emb;
        std::vector<BreadthNode> nodes;
        for (int i = 0; i < 12; ++i) {
            nodes.push_back(entity("n" + std::to_string(i), i % 3 == 0 ? "turing tape" : "tape " + std::to_string(i)));
        }
        const BreadthGraph ref(nodes, {});
        const Vector q = emb.embed("turing tape head");
        const auto expected = seed_nodes(ref, BreadthEmbeddings(ref, emb), q, 5);
        std::mt19937_64 rng(3);
        for (int round = 0; round < 10; ++round) {
            std::shuffle(nodes.begin(), nodes.end(), rng);
            const BreadthGraph g(nodes, {});
            CHECK(seed_nodes(g, BreadthEmbeddings(g, emb), q, 5) == expected);
        }
    }

    TEST_CASE("turing seeds match the golden list") {
        const HashingEmbedder emb;
        const BreadthGraph g = build_breadth_graph(parse_trace_file(dgr_test::fixture("turing.jsonl")));
        const Query q = parse_query(read_file(dgr_test::fixture("turing.query.json")));
        const auto seeds = seed_nodes(g, BreadthEmbeddings(g, emb), emb.embed(query_embedding_text(q)), 3);
        std::vector<std::string> ids;
        for (auto s : seeds) ids.push_back(g.nodes()[s].id);
        CHECK(ids == goldens()["turing"]["seeds_k3"].get<std::vector<std::string>>());
    }

    TEST_CASE("drift penalty and path score examples") {
        const TableEmbedder emb(3, {{"a", v3(1, 0, 0)}, {"b", v3(0, 1, 0)}, {"c", v3(0.6, 0.8, 0)}});
        const BreadthGraph g({entity("a"), entity("b"), entity("c")}, {});
        const BreadthEmbeddings be(g, emb);
        const std::vector<std::size_t> on_topic{g.index_of("a")};
        const std::vector<std::size_t> off_topic{g.index_of("b")};
        const std::vector<std::size_t> all{0, 1, 2};
        CHECK(offtopic_penalty(be, v3(1, 0, 0), on_topic) == doctest::Approx(0.0));
        CHECK(offtopic_penalty(be, v3(1, 0, 0), off_topic) == doctest::Approx(1.0));
        CHECK(offtopic_penalty(be, v3(1, 0, 0), all) == doctest::Approx(0 + 1 + 0.4).epsilon(1e-12));

        CHECK(score_breadth_path(std::vector{1.0}, 0.0, 1.0) == 0.0);
        CHECK(score_breadth_path(std::vector{0.5, 0.5}, 0.0, 1.0) == doctest::Approx(-1.3863).epsilon(1e-4));
        CHECK(score_breadth_path(std::vector{0.5, 0.5}, 0.3, 2.0) == doctest::Approx(-1.9863).epsilon(1e-4));
    }

    TEST_CASE("isolated seeds yield their zero-length paths") {
        const HashingEmbedder emb;
        const BreadthGraph g({entity("a"), entity("b")}, {});
        const BreadthEmbeddings be(g, emb);
        const std::vector<std::size_t> seeds{0, 1};
        const auto paths = enumerate_breadth_paths(g, be, seeds, emb.embed("a"), {});
        REQUIRE(paths.size() == 2);
        for (const auto& p : paths) CHECK(p.edges.empty());
    }

    TEST_CASE("length bound: chain s-a-b with L=1 gives only s-a") {
        const HashingEmbedder emb;
        const BreadthGraph g({entity("s"), entity("a"), entity("b")},
                             {{"s", "a", BreadthRelation::mentions, 0.6},
                              {"a", "b", BreadthRelation::mentions, 0.6}});
        const BreadthEmbeddings be(g, emb);
        const std::vector<std::size_t> seeds{g.index_of("s")};
        BreadthSearch search;
        search.max_length = 1;
        const auto paths = enumerate_breadth_paths(g, be, seeds, emb.embed("s"), search);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].nodes == std::vector<std::size_t>{g.index_of("s"), g.index_of("a")});
    }

    TEST_CASE("beam keeps the best paths of the exhaustive set") {
        const HashingEmbedder emb;
        const BreadthGraph g({entity("a", "alpha"), entity("b", "beta"), entity("c", "gamma"),
                              entity("d", "delta"), entity("e", "alpha beta")},
                             {{"a", "b", BreadthRelation::mentions, 0.6},
                              {"b", "c", BreadthRelation::cites, 0.8},
                              {"c", "d", BreadthRelation::supports, 0.35},
                              {"a", "e", BreadthRelation::aliases, 0.9},
                              {"e", "c", BreadthRelation::mentions, 0.6},
                              {"b", "d", BreadthRelation::defines, 0.8}});
        const BreadthEmbeddings be(g, emb);
        const Vector q = emb.embed("alpha beta gamma");
        const std::vector<std::size_t> seeds{g.index_of("a"), g.index_of("d")};

        std::vector<BreadthPath> all;
        for (const auto& [nodes, edges] : dgr_test::dfs_breadth_paths(g, seeds, 3)) {
            BreadthPath p{nodes, edges, 0.0};
            p.score = score_breadth_path(g, be, q, p, 1.0);
            all.push_back(p);
        }
        std::sort(all.begin(), all.end(), breadth_path_before);
        REQUIRE(all.size() > 8);
        all.resize(8);

        BreadthSearch search;
        search.max_length = 3;
        search.beam = 8;
        CHECK(enumerate_breadth_paths(g, be, seeds, q, search) == all);
    }
}
