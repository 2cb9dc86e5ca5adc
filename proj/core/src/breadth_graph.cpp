#include "dualgraph/breadth_graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "dualgraph/error.hpp"
#include "dualgraph/text.hpp"
#include "dualgraph/units.hpp"

namespace dgr {

std::string_view to_string(BreadthNodeKind kind) {
    switch (kind) {
        case BreadthNodeKind::entity: return "entity";
        case BreadthNodeKind::span: return "span";
        case BreadthNodeKind::symbol: return "symbol";
    }
    return "entity";
}

std::string_view to_string(BreadthRelation relation) {
    switch (relation) {
        case BreadthRelation::mentions: return "mentions";
        case BreadthRelation::defines: return "defines";
        case BreadthRelation::aliases: return "aliases";
        case BreadthRelation::cites: return "cites";
        case BreadthRelation::supports: return "supports";
        case BreadthRelation::derived_from: return "derived_from";
    }
    return "mentions";
}

std::optional<BreadthNodeKind> parse_breadth_node_kind(std::string_view text) {
    for (auto k : {BreadthNodeKind::entity, BreadthNodeKind::span, BreadthNodeKind::symbol}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<BreadthRelation> parse_breadth_relation(std::string_view text) {
    for (auto r : {BreadthRelation::mentions, BreadthRelation::defines, BreadthRelation::aliases,
                   BreadthRelation::cites, BreadthRelation::supports,
                   BreadthRelation::derived_from}) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

BreadthGraph::BreadthGraph(std::vector<BreadthNode> nodes, std::vector<BreadthEdge> edges,
                           AnswerSupport support)
    : nodes_(std::move(nodes)), support_(std::move(support)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const BreadthNode& a, const BreadthNode& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].label.empty()) {
            throw Error("breadth node '" + nodes_[i].id + "' has an empty label");
        }
        if (i > 0 && nodes_[i - 1].id == nodes_[i].id) {
            throw Error("duplicate breadth node id '" + nodes_[i].id + "'");
        }
    }

    std::map<std::tuple<std::string, std::string, BreadthRelation>, double> strongest;
    for (auto& e : edges) {
        if (!(e.confidence > 0.0 && e.confidence <= 1.0)) {
            throw Error("breadth edge confidence must lie in (0, 1]");
        }
        if (!find(e.src) || !find(e.dst)) {
            throw Error("breadth edge " + e.src + " -> " + e.dst + " references a missing node");
        }
        if (e.src == e.dst) {
            continue;
        }
        auto [it, inserted] =
            strongest.try_emplace({e.src, e.dst, e.relation}, e.confidence);
        if (!inserted) {
            it->second = std::max(it->second, e.confidence);
        }
    }
    for (const auto& [key, confidence] : strongest) {
        edges_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), confidence});
    }

    adjacency_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const std::size_t s = index_of(edges_[e].src);
        const std::size_t d = index_of(edges_[e].dst);
        endpoints_.emplace_back(s, d);
        adjacency_[s].push_back({e, d});
        adjacency_[d].push_back({e, s});
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end(), [](const Incidence& a, const Incidence& b) {
            return std::tie(a.neighbor, a.edge) < std::tie(b.neighbor, b.edge);
        });
    }
    for (auto it = support_.begin(); it != support_.end();) {
        if (!find(it->first)) {
            throw Error("answer support references missing node '" + it->first + "'");
        }
        it = it->second.empty() ? support_.erase(it) : std::next(it);
    }
}

std::optional<std::size_t> BreadthGraph::find(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const BreadthNode& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t BreadthGraph::index_of(std::string_view id) const {
    if (auto idx = find(id)) {
        return *idx;
    }
    throw Error("unknown breadth node '" + std::string(id) + "'");
}

std::vector<std::string> BreadthGraph::annotations(std::size_t node) const {
    auto it = support_.find(nodes_[node].id);
    if (it == support_.end()) {
        return {};
    }
    return {it->second.begin(), it->second.end()};
}

namespace {

std::string span_id(const TraceEvent& ev) { return "span:" + ev.run_id + "/" + ev.event_id; }

std::optional<std::string> value_term(const TraceEvent& ev) {
    if (!ev.value) {
        return std::nullopt;
    }
    std::string raw;
    if (const auto* number = std::get_if<double>(&*ev.value)) {
        raw = format_number(*number);
        if (ev.unit) {
            raw += " " + *ev.unit;
        }
    } else {
        raw = std::get<std::string>(*ev.value);
    }
    std::string label = normalize_label(raw);
    if (label.empty()) {
        return std::nullopt;
    }
    return label;
}

class BreadthBuilder {
public:
    BreadthBuilder(const Trace& trace, const BreadthConfidences& conf) : trace_(trace), conf_(conf) {
        for (const auto& ev : trace.events) {
            by_id_.emplace(ev.event_id, &ev);
        }
    }

    BreadthGraph build(const AliasTable& aliases) {
        for (const auto& ev : trace_.events) {
            if (ev.kind == EventKind::validator) {
                for (const auto& input : ev.inputs) {
                    auto& [ok, total] = validation_[input];
                    ++total;
                    ok += ev.status == EventStatus::ok ? 1 : 0;
                }
            }
        }

        for (const auto& ev : trace_.events) {
            if (ev.kind != EventKind::artifact && ev.kind != EventKind::note) {
                continue;
            }
            add_span(ev);
        }

        std::map<std::string, std::string> normalized_aliases;
        for (const auto& [from, to] : aliases) {
            const std::string f = normalize_label(from);
            const std::string t = normalize_label(to);
            if (!f.empty() && !t.empty() && f != t) {
                normalized_aliases.emplace(f, t);
            }
        }
        // Snapshot: alias targets added below must not trigger further aliasing.
        const auto existing = nodes_;
        for (const auto& [id, node] : existing) {
            if (node.kind != BreadthNodeKind::entity) {
                continue;
            }
            auto it = normalized_aliases.find(node.label);
            if (it == normalized_aliases.end()) {
                continue;
            }
            const std::string target = ensure_term(it->second, BreadthNodeKind::entity);
            edges_.push_back({id, target, BreadthRelation::aliases, conf_.aliases});
        }

        std::vector<BreadthNode> nodes;
        for (auto& [id, node] : nodes_) {
            nodes.push_back(std::move(node));
        }
        return BreadthGraph(std::move(nodes), std::move(edges_), std::move(support_));
    }

private:
    std::string ensure_term(const std::string& label, BreadthNodeKind kind) {
        const std::string id = (kind == BreadthNodeKind::symbol ? "sym:" : "ent:") + label;
        nodes_.try_emplace(id, BreadthNode{id, kind, label, label, std::nullopt});
        return id;
    }

    void add_span(const TraceEvent& ev) {
        const std::string id = span_id(ev);
        const std::string label = ev.run_id + "/" + ev.event_id;
        nodes_.try_emplace(id, BreadthNode{id, BreadthNodeKind::span, label,
                                           ev.text.empty() ? label : ev.text, ev.event_id});
        for (const auto& annotation : ev.answers) {
            support_[id].insert(annotation);
        }

        std::vector<std::string> terms;
        for (const auto& marked : extract_marked_terms(ev.text)) {
            const std::string term_label = normalize_label(marked.text);
            const auto kind = marked.role == MarkedTerm::Role::symbol ? BreadthNodeKind::symbol
                                                                      : BreadthNodeKind::entity;
            const std::string term = ensure_term(term_label, kind);
            const bool defines = marked.role == MarkedTerm::Role::definition;
            edges_.push_back({id, term, defines ? BreadthRelation::defines : BreadthRelation::mentions,
                              defines ? conf_.defines : conf_.mentions});
            terms.push_back(term);
        }
        if (ev.kind == EventKind::artifact) {
            if (auto vt = value_term(ev)) {
                const std::string term = ensure_term(*vt, BreadthNodeKind::entity);
                edges_.push_back({id, term, BreadthRelation::mentions, conf_.mentions});
                terms.push_back(term);
            }
            if (auto it = validation_.find(ev.event_id); it != validation_.end()) {
                const auto [ok, total] = it->second;
                const double pass_rate = static_cast<double>(ok) / static_cast<double>(total);
                if (pass_rate > 0.0) {
                    for (const auto& term : terms) {
                        edges_.push_back(
                            {id, term, BreadthRelation::supports, conf_.supports_scale * pass_rate});
                    }
                }
            }
        }

        for (const auto& input : ev.inputs) {
            const TraceEvent* src = lookup(input);
            if (src == nullptr) {
                continue;
            }
            if (ev.kind == EventKind::note) {
                if (src->kind == EventKind::artifact || src->kind == EventKind::note) {
                    edges_.push_back({id, span_id(*src), BreadthRelation::cites, conf_.cites});
                }
                continue;
            }
            if (src->kind == EventKind::artifact || src->kind == EventKind::note) {
                edges_.push_back({id, span_id(*src), BreadthRelation::derived_from, conf_.derived_from});
            } else if (src->kind == EventKind::action) {
                for (const auto& upstream : src->inputs) {
                    const TraceEvent* up = lookup(upstream);
                    if (up != nullptr &&
                        (up->kind == EventKind::artifact || up->kind == EventKind::note)) {
                        edges_.push_back(
                            {id, span_id(*up), BreadthRelation::derived_from, conf_.derived_from});
                    }
                }
            }
        }
    }

    const TraceEvent* lookup(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : it->second;
    }

    const Trace& trace_;
    const BreadthConfidences& conf_;
    std::map<std::string, const TraceEvent*> by_id_;
    std::map<std::string, std::pair<int, int>> validation_;  // artifact -> (ok, total)
    std::map<std::string, BreadthNode> nodes_;
    std::vector<BreadthEdge> edges_;
    AnswerSupport support_;
};

}  // namespace

BreadthGraph build_breadth_graph(const Trace& trace, const AliasTable& aliases,
                                 const BreadthConfidences& confidences) {
    return BreadthBuilder(trace, confidences).build(aliases);
}

std::string_view node_embedding_text(const BreadthNode& node) {
    return node.text.empty() ? std::string_view(node.label) : std::string_view(node.text);
}

Vector smoothed_embedding(const BreadthGraph& graph, std::size_t node,
                          std::span<const Vector> raw_embeddings) {
    const Vector& self = raw_embeddings[node];
    std::map<std::size_t, double> weight;
    for (const auto& inc : graph.incident(node)) {
        double& w = weight[inc.neighbor];
        w = std::max(w, graph.edges()[inc.edge].confidence);
    }
    if (weight.empty()) {
        return self;
    }
    Vector acc = self;
    double total = 1.0;
    for (const auto& [neighbor, w] : weight) {
        const Vector& other = raw_embeddings[neighbor];
        for (std::size_t i = 0; i < acc.dim(); ++i) {
            acc.components[i] += w * other.components[i];
        }
        total += w;
    }
    for (double& x : acc.components) {
        x /= total;
    }
    if (acc.is_zero()) {
        return self;
    }
    return normalized(std::move(acc));
}

Vector smoothed_embedding(const BreadthGraph& graph, std::size_t node,
                          const EmbeddingProvider& embedder) {
    std::vector<Vector> raw(graph.nodes().size());
    raw[node] = embedder.embed(node_embedding_text(graph.nodes()[node]));
    for (const auto& inc : graph.incident(node)) {
        if (raw[inc.neighbor].dim() == 0) {
            raw[inc.neighbor] = embedder.embed(node_embedding_text(graph.nodes()[inc.neighbor]));
        }
    }
    return smoothed_embedding(graph, node, raw);
}

BreadthEmbeddings::BreadthEmbeddings(const BreadthGraph& graph, const EmbeddingProvider& embedder) {
    std::vector<std::string> texts;
    texts.reserve(graph.nodes().size());
    for (const auto& node : graph.nodes()) {
        texts.emplace_back(node_embedding_text(node));
    }
    raw_ = embedder.embed_batch(texts);
    smoothed_.reserve(raw_.size());
    for (std::size_t i = 0; i < raw_.size(); ++i) {
        smoothed_.push_back(smoothed_embedding(graph, i, raw_));
    }
}

double breadth_score(const BreadthEmbeddings& embeddings, const Vector& query, std::size_t node) {
    return cosine(query, embeddings.smoothed(node));
}

std::vector<std::size_t> seed_nodes(const BreadthGraph& graph, const BreadthEmbeddings& embeddings,
                                    const Vector& query, std::size_t k) {
    if (k == 0) {
        throw Error("seed count must be at least 1");
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(graph.nodes().size());
    for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
        scored.emplace_back(breadth_score(embeddings, query, i), i);
    }
    // Node indices follow id order, so the index is the id tie-break.
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) {
        out.push_back(scored[i].second);
    }
    return out;
}

double offtopic_penalty(const BreadthEmbeddings& embeddings, const Vector& query,
                        std::span<const std::size_t> nodes) {
    double total = 0.0;
    for (std::size_t v : nodes) {
        total += std::max(0.0, 1.0 - breadth_score(embeddings, query, v));
    }
    return total;
}

double score_breadth_path(std::span<const double> edge_confidences, double offtopic,
                          double lambda_off) {
    double log_weight = 0.0;
    for (double c : edge_confidences) {
        log_weight += std::log(c);
    }
    return log_weight - lambda_off * offtopic;
}

double score_breadth_path(const BreadthGraph& graph, const BreadthEmbeddings& embeddings,
                          const Vector& query, const BreadthPath& path, double lambda_off) {
    std::vector<double> confidences;
    confidences.reserve(path.edges.size());
    for (std::size_t e : path.edges) {
        confidences.push_back(graph.edges()[e].confidence);
    }
    return score_breadth_path(confidences, offtopic_penalty(embeddings, query, path.nodes),
                              lambda_off);
}

bool breadth_path_before(const BreadthPath& a, const BreadthPath& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.nodes != b.nodes) return a.nodes < b.nodes;
    return a.edges < b.edges;
}

std::vector<BreadthPath> enumerate_breadth_paths(const BreadthGraph& graph,
                                                 const BreadthEmbeddings& embeddings,
                                                 std::span<const std::size_t> seeds,
                                                 const Vector& query, const BreadthSearch& search) {
    if (search.max_length == 0) {
        throw Error("breadth path length bound must be at least 1");
    }
    std::vector<BreadthPath> out;
    if (search.beam == 0) {
        return out;
    }

    auto after = [](const BreadthPath& a, const BreadthPath& b) { return breadth_path_before(b, a); };
    std::priority_queue<BreadthPath, std::vector<BreadthPath>, decltype(after)> frontier(after);

    std::set<std::size_t> unique_seeds(seeds.begin(), seeds.end());
    for (std::size_t s : unique_seeds) {
        const bool isolated = graph.incident(s).empty();
        for (const auto& inc : graph.incident(s)) {
            BreadthPath p{{s, inc.neighbor}, {inc.edge}, 0.0};
            p.score = score_breadth_path(graph, embeddings, query, p, search.lambda_off);
            frontier.push(std::move(p));
        }
        if (isolated) {
            BreadthPath p{{s}, {}, 0.0};
            p.score = score_breadth_path(graph, embeddings, query, p, search.lambda_off);
            frontier.push(std::move(p));
        }
    }

    const std::size_t none_bucket = search.answer_count;
    std::vector<std::size_t> filled(search.answer_count + 1, 0);
    std::size_t full_buckets = 0;

    while (!frontier.empty() && full_buckets < filled.size()) {
        BreadthPath path = frontier.top();
        frontier.pop();

        std::vector<std::size_t> buckets;
        if (search.answers_of) {
            buckets = search.answers_of(path.nodes.back());
        }
        if (buckets.empty()) {
            buckets.push_back(none_bucket);
        }
        bool retained = false;
        for (std::size_t b : buckets) {
            if (filled[b] < search.beam) {
                retained = true;
                if (++filled[b] == search.beam) {
                    ++full_buckets;
                }
            }
        }
        if (retained) {
            out.push_back(path);
        }

        if (path.edges.size() >= search.max_length) {
            continue;
        }
        for (const auto& inc : graph.incident(path.nodes.back())) {
            if (std::find(path.nodes.begin(), path.nodes.end(), inc.neighbor) != path.nodes.end()) {
                continue;
            }
            BreadthPath next = path;
            next.nodes.push_back(inc.neighbor);
            next.edges.push_back(inc.edge);
            next.score = score_breadth_path(graph, embeddings, query, next, search.lambda_off);
            frontier.push(std::move(next));
        }
    }
    return out;
}

}  // namespace dgr
