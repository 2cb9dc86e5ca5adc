#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualgraph/config.hpp"
#include "dualgraph/error.hpp"
#include "dualgraph/graph_io.hpp"
#include "dualgraph/merge.hpp"
#include "dualgraph/outcome_io.hpp"
#include "dualgraph/pipeline.hpp"
#include "dualgraph/remote_embedding.hpp"
#include "dualgraph/theorem.hpp"
#include "dualgraph/trace.hpp"
#include "dualgraph/units.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kParseFailure = 2,
    kValidationFailure = 3,
    kAbstain = 4,
};

struct Globals {
    std::string config_path;
    std::string mode;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

dgr::RunConfig resolve_config(const Globals& g) {
    dgr::RunConfig config = g.config_path.empty() ? dgr::parse_config("")
                                                  : dgr::load_config(g.config_path);
    if (!g.mode.empty()) {
        const auto mode = dgr::parse_aggregation_mode(g.mode);
        if (!mode) throw dgr::ConfigError("--mode must be signal or subject");
        config.mode = *mode;
    }
    if (g.seed) {
        config.rng_seed = *g.seed;
        config.scenario.rng_seed = *g.seed;
    }
    if (g.threads) config.threads = *g.threads;
    config.validate();
    return config;
}

std::unique_ptr<dgr::EmbeddingProvider> make_embedder(const dgr::RunConfig& config) {
    if (config.embedder == "remote") {
        dgr::RemoteEndpoint endpoint;
        endpoint.url = config.endpoint;
        endpoint.dim = config.dim;
        auto remote = std::make_unique<dgr::RemoteEmbedder>(endpoint);
        if (!config.embedding_cache.empty() && fs::exists(config.embedding_cache)) {
            remote->load_cache(config.embedding_cache);
        }
        return remote;
    }
    return std::make_unique<dgr::HashingEmbedder>(config.dim);
}

void save_embedder_cache(const dgr::EmbeddingProvider& embedder, const dgr::RunConfig& config) {
    if (const auto* remote = dynamic_cast<const dgr::RemoteEmbedder*>(&embedder)) {
        if (!config.embedding_cache.empty()) remote->save_cache(config.embedding_cache);
    }
}

// Runs `command` with the path context on stdin; exit status 0 accepts.
dgr::PathVerifier command_verifier(std::string command) {
    return [command](const dgr::ScoredPath& path, const std::string& context) {
        const std::string line = "answer=" + path.answer + "\n" + context + "\n";
        FILE* pipe = ::popen(command.c_str(), "w");
        if (pipe == nullptr) throw dgr::Error("cannot start verifier '" + command + "'");
        std::fwrite(line.data(), 1, line.size(), pipe);
        return ::pclose(pipe) == 0;
    };
}

std::string read_trace_bytes(const std::string& path, const std::string& extractor) {
    if (extractor.empty()) return dgr::read_file(path);
    const std::string command = extractor + " < '" + path + "'";
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr) throw dgr::Error("cannot start extractor '" + extractor + "'");
    std::string bytes;
    char buffer[4096];
    std::size_t n = 0;
    while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) bytes.append(buffer, n);
    if (::pclose(pipe) != 0) throw dgr::Error("extractor failed on '" + path + "'");
    return bytes;
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& inputs, const std::string& extractor) {
    resolve_config(g);
    int status = kOk;
    std::size_t written = 0;
    for (const auto& path : inputs) {
        dgr::Trace trace;
        try {
            trace = dgr::parse_trace(read_trace_bytes(path, extractor));
        } catch (const dgr::MalformedRecord& e) {
            std::cerr << path << ":" << e.line_no() << ": " << e.what() << "\n";
            status = kParseFailure;
            continue;
        } catch (const dgr::Error& e) {
            std::cerr << path << ": " << e.what() << "\n";
            status = kParseFailure;
            continue;
        }
        const auto violations = dgr::validate_trace(trace);
        if (!violations.empty()) {
            for (const auto& v : violations) {
                std::cerr << path << ": " << dgr::to_string(v.kind) << " at " << v.event_id << ": "
                          << v.detail << "\n";
            }
            if (status == kOk) status = kValidationFailure;
            continue;
        }
        dgr::write_file(fs::path(g.out_dir) / (trace.run_id + ".trace.jsonl"),
                        dgr::serialize_trace(trace));
        ++written;
    }
    std::cerr << "ingested " << written << " of " << inputs.size() << " traces\n";
    return status;
}

std::vector<dgr::Trace> load_valid_traces(const std::vector<std::string>& inputs) {
    std::vector<dgr::Trace> traces;
    for (const auto& path : inputs) {
        dgr::Trace trace = dgr::parse_trace_file(path);
        const auto violations = dgr::validate_trace(trace);
        if (!violations.empty()) {
            throw dgr::Error(path + ": " + std::string(dgr::to_string(violations.front().kind)) +
                             " at " + violations.front().event_id);
        }
        traces.push_back(std::move(trace));
    }
    return traces;
}

dgr::AliasTable load_aliases(const dgr::RunConfig& config) {
    if (config.aliases.empty()) return {};
    return dgr::parse_alias_table(dgr::read_file(config.aliases));
}

struct GraphPair {
    dgr::BreadthGraph breadth;
    dgr::DepthGraph depth;
    std::vector<dgr::DroppedEdge> dropped;
};

GraphPair merged_graphs(const std::vector<dgr::Trace>& traces, const dgr::AliasTable& aliases,
                        const dgr::BreadthConfidences& confidences) {
    std::vector<dgr::BreadthGraph> breadth;
    std::vector<dgr::DepthGraph> depth;
    GraphPair out;
    for (const auto& t : traces) {
        breadth.push_back(dgr::build_breadth_graph(t, aliases, confidences));
        auto built = dgr::build_depth_graph(t);
        depth.push_back(std::move(built.graph));
        out.dropped.insert(out.dropped.end(), built.dropped.begin(), built.dropped.end());
    }
    out.breadth = dgr::merge_breadth_graphs(breadth);
    out.depth = dgr::merge_depth_graphs(depth);
    std::sort(out.dropped.begin(), out.dropped.end(), [](const auto& a, const auto& b) {
        return std::tie(a.src, a.dst, a.gate, a.reason) < std::tie(b.src, b.dst, b.gate, b.reason);
    });
    return out;
}

void write_pair(const fs::path& dir, const std::string& stem, const GraphPair& pair) {
    dgr::write_file(dir / (stem + ".breadth.jsonl"), dgr::serialize_breadth_graph(pair.breadth));
    dgr::write_file(dir / (stem + ".depth.jsonl"), dgr::serialize_depth_graph(pair.depth));
    dgr::write_file(dir / (stem + ".dropped.jsonl"), dgr::serialize_dropped_edges(pair.dropped));
}

int cmd_build(const Globals& g, const std::vector<std::string>& inputs) {
    const dgr::RunConfig config = resolve_config(g);
    const auto traces = load_valid_traces(inputs);
    const auto aliases = load_aliases(config);
    const fs::path dir = g.out_dir;
    if (config.mode == dgr::AggregationMode::subject) {
        const GraphPair pair = merged_graphs(traces, aliases, config.confidences);
        write_pair(dir, "subject", pair);
        std::cout << "subject: " << pair.breadth.nodes().size() << " breadth nodes, "
                  << pair.depth.nodes().size() << " depth nodes, " << pair.dropped.size()
                  << " dropped edges\n";
        return kOk;
    }
    for (const auto& t : traces) {
        auto built = dgr::build_depth_graph(t);
        const GraphPair pair{dgr::build_breadth_graph(t, aliases, config.confidences), std::move(built.graph),
                             std::move(built.dropped)};
        write_pair(dir, t.run_id, pair);
        std::cout << t.run_id << ": " << pair.breadth.nodes().size() << " breadth nodes, "
                  << pair.depth.nodes().size() << " depth nodes, " << pair.dropped.size()
                  << " dropped edges\n";
    }
    return kOk;
}

struct QueryInputs {
    std::string query;
    std::string breadth;
    std::string depth;
    std::vector<std::string> traces;
};

int cmd_query(const Globals& g, const QueryInputs& in) {
    const dgr::RunConfig config = resolve_config(g);
    const dgr::Query query = dgr::parse_query(dgr::read_file(in.query));

    GraphPair pair;
    if (!in.traces.empty()) {
        const auto traces = load_valid_traces(in.traces);
        if (traces.size() == 1) {
            pair.breadth = dgr::build_breadth_graph(traces.front(), load_aliases(config), config.confidences);
            pair.depth = dgr::build_depth_graph(traces.front()).graph;
        } else {
            pair = merged_graphs(traces, load_aliases(config), config.confidences);
        }
    } else {
        if (in.breadth.empty() || in.depth.empty()) {
            throw dgr::ConfigError("query needs --trace or both --breadth and --depth");
        }
        pair.breadth = dgr::parse_breadth_graph(dgr::read_file(in.breadth));
        pair.depth = dgr::parse_depth_graph(dgr::read_file(in.depth));
    }

    const auto embedder = make_embedder(config);
    const dgr::Engine engine(std::move(pair.breadth), std::move(pair.depth), *embedder);
    dgr::ExecutionOptions options;
    options.threads = config.threads;
    if (!config.verifier_command.empty()) options.verifier = command_verifier(config.verifier_command);

    const dgr::FusionOutcome outcome = engine.run(query, config.params, options);
    save_embedder_cache(*embedder, config);
    dgr::write_file(fs::path(g.out_dir) / (query.question_id + ".outcome.json"),
                    dgr::serialize_outcome(outcome));
    if (outcome.abstained) {
        std::cout << query.question_id << ": abstain\n";
        return kAbstain;
    }
    std::cout << query.question_id << ": " << outcome.map_answer << "\n";
    return kOk;
}

int cmd_explain(const Globals& g, const std::string& outcome_path, bool to_file) {
    const dgr::FusionOutcome outcome = dgr::parse_outcome(dgr::read_file(outcome_path));
    const std::string text = dgr::explain_outcome(outcome);
    std::cout << text;
    if (to_file) {
        dgr::write_file(fs::path(g.out_dir) / (outcome.question_id + ".explain.txt"), text);
    }
    return outcome.abstained ? kAbstain : kOk;
}

struct TheoremOverrides {
    std::optional<std::size_t> trials;
    std::optional<std::size_t> answers;
    std::optional<double> sharpness_breadth;
    std::optional<double> sharpness_depth;
    bool anti = false;
};

int cmd_verify_theorem(const Globals& g, const TheoremOverrides& o) {
    const dgr::RunConfig config = resolve_config(g);
    dgr::SyntheticScenario scenario = config.scenario;
    if (o.trials) scenario.trials = *o.trials;
    if (o.answers) scenario.answer_count = *o.answers;
    if (o.sharpness_breadth) scenario.sharpness_breadth = *o.sharpness_breadth;
    if (o.sharpness_depth) scenario.sharpness_depth = *o.sharpness_depth;
    if (o.anti) scenario.calibrated = false;
    scenario.validate();

    const dgr::RiskReport report = dgr::estimate_risks(scenario, config.threads);
    const std::string text = dgr::risk_report_text(scenario, report);
    std::cout << text;
    const fs::path dir = g.out_dir;
    dgr::write_file(dir / "risk_report.txt", text);
    dgr::write_file(dir / "risk_report.csv",
                    dgr::risk_report_csv_header() + dgr::risk_report_csv_row(scenario, report));
    return report.bound_violations == 0 && report.oracle_inequality_holds() ? kOk : kFailure;
}

int cmd_report(const Globals& g, const std::vector<std::string>& outcomes) {
    std::string table = "question_id\tstatus\tanswer\tprobability\talpha\tchain_edges\n";
    for (const auto& path : outcomes) {
        const dgr::FusionOutcome o = dgr::parse_outcome(dgr::read_file(path));
        table += o.question_id + "\t" + (o.abstained ? "abstain" : "answered") + "\t" +
                 (o.abstained ? "-" : o.map_answer) + "\t" +
                 (o.abstained ? "-" : dgr::format_number(o.p_calibrated.prob(o.map_answer))) +
                 "\t" + dgr::format_number(o.alpha) + "\t" + std::to_string(o.chain.size()) + "\n";
    }
    std::cout << table;
    dgr::write_file(fs::path(g.out_dir) / "report.tsv", table);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dgr: dual-graph evidence engine"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "flat key = value configuration file");
    app.add_option("--mode", g.mode, "graph aggregation: signal | subject");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "random seed override");
    app.add_option("--threads", g.threads, "worker threads");

    std::vector<std::string> ingest_inputs;
    std::string extractor;
    auto* ingest = app.add_subcommand("ingest", "parse, validate and canonicalize traces");
    ingest->add_option("traces", ingest_inputs, "trace files")->required();
    ingest->add_option("--extractor", extractor, "command turning a raw log on stdin into trace lines");

    std::vector<std::string> build_inputs;
    auto* build = app.add_subcommand("build", "build graph files from traces");
    build->add_option("traces", build_inputs, "trace files")->required();

    QueryInputs query_inputs;
    auto* query = app.add_subcommand("query", "answer a query and write its outcome");
    query->add_option("query", query_inputs.query, "query JSON file")->required();
    query->add_option("--breadth", query_inputs.breadth, "breadth graph file");
    query->add_option("--depth", query_inputs.depth, "depth graph file");
    query->add_option("--trace", query_inputs.traces, "build graphs from these traces instead");

    std::string outcome_path;
    bool explain_to_file = false;
    auto* explain = app.add_subcommand("explain", "print the evidence chain of an outcome");
    explain->add_option("outcome", outcome_path, "outcome JSON file")->required();
    explain->add_flag("--write", explain_to_file, "also write <question_id>.explain.txt");

    TheoremOverrides overrides;
    auto* verify = app.add_subcommand("verify-theorem", "Monte Carlo check of the fusion bounds");
    verify->add_option("--trials", overrides.trials);
    verify->add_option("--answers", overrides.answers);
    verify->add_option("--sharpness-breadth", overrides.sharpness_breadth);
    verify->add_option("--sharpness-depth", overrides.sharpness_depth);
    verify->add_flag("--anti-calibrated", overrides.anti);

    std::vector<std::string> report_inputs;
    auto* report = app.add_subcommand("report", "tabulate outcome files");
    report->add_option("outcomes", report_inputs, "outcome JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kFailure;
    }

    try {
        if (*ingest) return cmd_ingest(g, ingest_inputs, extractor);
        if (*build) return cmd_build(g, build_inputs);
        if (*query) return cmd_query(g, query_inputs);
        if (*explain) return cmd_explain(g, outcome_path, explain_to_file);
        if (*verify) return cmd_verify_theorem(g, overrides);
        if (*report) return cmd_report(g, report_inputs);
    } catch (const dgr::MergeConflict& e) {
        std::cerr << "merge conflict between " << e.first() << " and " << e.second() << ": "
                  << e.what() << "\n";
        return kValidationFailure;
    } catch (const dgr::MalformedRecord& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const dgr::SchemaMismatch& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const dgr::DuplicateEventId& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const dgr::DanglingInputRef& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const dgr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
