#include "dualgraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <tuple>

#include "dualgraph/error.hpp"
#include "dualgraph/text.hpp"

namespace dgr {
namespace {

bool uses_removed(const ScoredPath& p, const std::set<EdgeRef>& removed) {
    return std::any_of(p.edges.begin(), p.edges.end(),
                       [&](const EdgeRef& e) { return removed.contains(e); });
}

std::optional<AnswerDistribution> channel_distribution(const std::vector<ScoredPath>& paths,
                                                       const std::vector<std::string>& answers,
                                                       const std::set<EdgeRef>& removed) {
    std::vector<ScoredPath> kept;
    for (const auto& p : paths) {
        if (!uses_removed(p, removed)) kept.push_back(p);
    }
    try {
        return answer_distribution(kept, answers);
    } catch (const NoSupportingPaths&) {
        return std::nullopt;
    }
}

bool path_order(const ScoredPath& a, const ScoredPath& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.nodes, a.edges) < std::tie(b.nodes, b.edges);
}

void sort_by_answer(std::vector<ScoredPath>& paths, const Query& query) {
    std::stable_sort(paths.begin(), paths.end(), [&](const ScoredPath& a, const ScoredPath& b) {
        const auto ia = query.answer_index(a.answer);
        const auto ib = query.answer_index(b.answer);
        if (ia != ib) return ia < ib;
        return path_order(a, b);
    });
}

}  // namespace

void HyperParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("hyperparameter out of range: ") + what);
    };
    require(lambda_off >= 0.0, "lambda_off >= 0");
    require(lambda_ord >= 0.0, "lambda_ord >= 0");
    require(tau > 0.0 && tau <= 1.0, "tau in (0, 1]");
    require(gamma > 0.0, "gamma > 0");
    require(beta >= 0.0, "beta >= 0");
    require(delta > 0.0, "delta > 0");
    require(max_breadth_length >= 1, "max_breadth_length >= 1");
    require(max_depth_length >= 1, "max_depth_length >= 1");
    require(seeds >= 1, "seeds >= 1");
    require(beam >= 1, "beam >= 1");
    require(floor > 0.0 && floor < 1.0, "floor in (0, 1)");
}

ChannelState evaluate_paths(const std::vector<ScoredPath>& breadth_paths,
                            const std::vector<ScoredPath>& depth_paths,
                            const std::vector<std::string>& answers, const HyperParams& params,
                            const std::set<EdgeRef>& removed) {
    ChannelState state;
    state.breadth = channel_distribution(breadth_paths, answers, removed);
    state.depth = channel_distribution(depth_paths, answers, removed);
    if (!state.breadth && !state.depth) return state;
    state.fusion = fuse_channels(state.breadth, state.depth, params.floor);
    state.calibrated = calibrate(state.fusion->fused, params.gamma, params.beta,
                                 state.fusion->h_breadth, state.fusion->h_depth);
    return state;
}

std::string query_embedding_text(const Query& query) {
    std::string text = query.text;
    for (const auto& term : query.seed_terms) {
        text += ' ';
        text += term;
    }
    return text;
}

Engine::Engine(BreadthGraph breadth, DepthGraph depth, const EmbeddingProvider& embedder)
    : breadth_(std::move(breadth)),
      depth_(std::move(depth)),
      embedder_(embedder),
      embeddings_(breadth_, embedder) {}

std::vector<ScoredPath> Engine::breadth_channel(const Query& query, const HyperParams& params) const {
    const AnswerMatcher matcher(query);
    std::vector<std::vector<std::size_t>> support(breadth_.nodes().size());
    for (std::size_t i = 0; i < breadth_.nodes().size(); ++i) {
        support[i] = matcher.match(normalize_label(breadth_.nodes()[i].label), breadth_.annotations(i));
    }

    const Vector fq = embedder_.embed(query_embedding_text(query));
    const auto seeds = seed_nodes(breadth_, embeddings_, fq, params.seeds);

    BreadthSearch search;
    search.max_length = params.max_breadth_length;
    search.beam = params.beam;
    search.lambda_off = params.lambda_off;
    search.answer_count = query.answers.size();
    search.answers_of = [&](std::size_t node) { return support[node]; };

    std::vector<ScoredPath> out;
    for (const auto& path : enumerate_breadth_paths(breadth_, embeddings_, seeds, fq, search)) {
        const std::size_t terminal = path.nodes.back();
        if (support[terminal].empty()) continue;
        ScoredPath scored;
        scored.channel = Channel::breadth;
        for (std::size_t n : path.nodes) scored.nodes.push_back(breadth_.nodes()[n].id);
        for (std::size_t e : path.edges) {
            const auto& edge = breadth_.edges()[e];
            scored.edges.push_back({Channel::breadth, edge.src, edge.dst,
                                    std::string(to_string(edge.relation))});
        }
        scored.score = path.score;
        for (std::size_t a : support[terminal]) {
            scored.answer = query.answers[a].id;
            out.push_back(scored);
        }
    }
    sort_by_answer(out, query);
    return out;
}

std::vector<ScoredPath> Engine::depth_channel(const Query& query, const OpSequence& query_ops,
                                              const HyperParams& params) const {
    const AnswerMatcher matcher(query);
    const auto& nodes = depth_.nodes();
    std::vector<std::vector<std::size_t>> support(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        support[i] = matcher.match(nodes[i].match_key(), depth_.annotations(i));
    }
    // A passing validator vouches for whatever the artifact it checks supports.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto* v = std::get_if<ValidatorInfo>(&nodes[i].payload);
        if (v == nullptr || v->outcome != EventStatus::ok) continue;
        for (std::size_t e : depth_.incoming(i)) {
            const auto& inherited = support[depth_.edge_src(e)];
            support[i].insert(support[i].end(), inherited.begin(), inherited.end());
        }
        std::sort(support[i].begin(), support[i].end());
        support[i].erase(std::unique(support[i].begin(), support[i].end()), support[i].end());
    }

    std::vector<std::pair<double, std::size_t>> targets;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (support[i].empty()) continue;
        targets.emplace_back(
            depth_score(depth_, query_ops, i, params.max_depth_length, params.tau), i);
    }
    std::sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (targets.size() > params.seeds) targets.resize(params.seeds);

    std::vector<std::vector<ScoredPath>> per_answer(query.answers.size());
    for (const auto& [_, target] : targets) {
        for (const auto& path : enumerate_admissible_paths(depth_, target, params.max_depth_length)) {
            if (path.edges.empty()) continue;
            ScoredPath scored;
            scored.channel = Channel::depth;
            for (std::size_t n : path.nodes) scored.nodes.push_back(nodes[n].id);
            for (std::size_t e : path.edges) {
                const auto& edge = depth_.edges()[e];
                scored.edges.push_back({Channel::depth, edge.src, edge.dst,
                                        std::string(to_string(edge.relation))});
            }
            const auto confidences = path_confidences(depth_, path);
            scored.score = score_depth_path(confidences, lcs_typed(query_ops, path_ops(depth_, path)),
                                            query_ops.size(), params.lambda_ord);
            for (std::size_t a : support[target]) {
                scored.answer = query.answers[a].id;
                per_answer[a].push_back(scored);
            }
        }
    }

    std::vector<ScoredPath> out;
    for (auto& bucket : per_answer) {
        std::sort(bucket.begin(), bucket.end(), path_order);
        if (bucket.size() > params.beam) bucket.resize(params.beam);
        out.insert(out.end(), std::make_move_iterator(bucket.begin()),
                   std::make_move_iterator(bucket.end()));
    }
    return out;
}

std::string Engine::path_context(const ScoredPath& path) const {
    std::string out;
    for (const auto& id : path.nodes) {
        if (!out.empty()) out += " -> ";
        if (path.channel == Channel::breadth) {
            out += node_embedding_text(breadth_.nodes()[breadth_.index_of(id)]);
        } else {
            const auto& node = depth_.nodes()[depth_.index_of(id)];
            const std::string key = node.match_key();
            out += key.empty() ? node.id : node.id + " = " + key;
        }
    }
    return out;
}

FusionOutcome Engine::run(const Query& query, const HyperParams& params,
                          const ExecutionOptions& options) const {
    query.validate();
    params.validate();

    FusionOutcome out;
    out.question_id = query.question_id;
    for (const auto& a : query.answers) out.answers.push_back(a.id);
    out.params = params;
    out.query_ops = extract_query_ops(query);

    if (options.threads > 1) {
        auto breadth = std::async(std::launch::async, [&] { return breadth_channel(query, params); });
        out.depth_paths = depth_channel(query, out.query_ops, params);
        out.breadth_paths = breadth.get();
    } else {
        out.breadth_paths = breadth_channel(query, params);
        out.depth_paths = depth_channel(query, out.query_ops, params);
    }

    if (options.verifier) {
        auto filter = [&](std::vector<ScoredPath>& paths) {
            std::erase_if(paths, [&](const ScoredPath& p) {
                return !options.verifier(p, path_context(p));
            });
        };
        filter(out.breadth_paths);
        filter(out.depth_paths);
    }

    const ChannelState state = evaluate_paths(out.breadth_paths, out.depth_paths, out.answers, params);
    out.p_breadth = state.breadth;
    out.p_depth = state.depth;
    if (!state.fusion) {
        out.abstained = true;
        out.alpha = 0.5;
        return out;
    }
    out.alpha = state.fusion->alpha;
    out.p_fused = state.fusion->fused;
    out.p_calibrated = *state.calibrated;
    out.map_answer = select_answer(out.p_calibrated);

    std::vector<ScoredPath> supporting;
    for (const auto* channel : {&out.breadth_paths, &out.depth_paths}) {
        for (const auto& p : *channel) {
            if (p.answer == out.map_answer) supporting.push_back(p);
        }
    }
    const std::string& target = out.map_answer;
    const ChainProbe probe = [&](const std::set<EdgeRef>& removed) {
        const ChannelState s = evaluate_paths(out.breadth_paths, out.depth_paths, out.answers,
                                              params, removed);
        return s.calibrated ? s.calibrated->prob(target) : 0.0;
    };
    EvidenceChain chain = minimal_evidence_chain(supporting, probe, params.delta, options.threads);
    out.chain = std::move(chain.edges);
    out.edge_marginals = std::move(chain.marginals);
    out.chain_prob = chain.chain_prob;
    return out;
}

}  // namespace dgr
