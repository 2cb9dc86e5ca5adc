#include "dualgraph/depth_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "dualgraph/error.hpp"
#include "dualgraph/text.hpp"
#include "dualgraph/units.hpp"

namespace dgr {

std::string_view to_string(DepthNodeKind kind) {
    switch (kind) {
        case DepthNodeKind::action: return "action";
        case DepthNodeKind::artifact: return "artifact";
        case DepthNodeKind::validator: return "validator";
    }
    return "action";
}

std::string_view to_string(DepthRelation relation) {
    switch (relation) {
        case DepthRelation::consumes: return "consumes";
        case DepthRelation::produces: return "produces";
        case DepthRelation::verified_by: return "verified_by";
        case DepthRelation::carryover: return "carryover";
    }
    return "produces";
}

std::string_view to_string(ValueType type) {
    switch (type) {
        case ValueType::number: return "number";
        case ValueType::text: return "text";
        case ValueType::table: return "table";
    }
    return "text";
}

std::string_view to_string(AdmissionGate gate) {
    switch (gate) {
        case AdmissionGate::relation_typing: return "RelationTyping";
        case AdmissionGate::unit_compatibility: return "UnitCompatibility";
        case AdmissionGate::temporal_order: return "TemporalOrder";
    }
    return "RelationTyping";
}

std::optional<DepthRelation> parse_depth_relation(std::string_view text) {
    for (auto r : {DepthRelation::consumes, DepthRelation::produces, DepthRelation::verified_by,
                   DepthRelation::carryover}) {
        if (to_string(r) == text) return r;
    }
    return std::nullopt;
}

std::optional<ValueType> parse_value_type(std::string_view text) {
    for (auto t : {ValueType::number, ValueType::text, ValueType::table}) {
        if (to_string(t) == text) return t;
    }
    return std::nullopt;
}

std::optional<AdmissionGate> parse_admission_gate(std::string_view text) {
    for (auto g : {AdmissionGate::relation_typing, AdmissionGate::unit_compatibility,
                   AdmissionGate::temporal_order}) {
        if (to_string(g) == text) return g;
    }
    return std::nullopt;
}

std::string DepthNode::match_key() const {
    const auto* artifact = std::get_if<ArtifactInfo>(&payload);
    if (artifact == nullptr || !artifact->value) {
        return {};
    }
    if (const auto* number = std::get_if<double>(&*artifact->value)) {
        std::string text = format_number(*number);
        if (artifact->unit && *artifact->unit != kDimensionless) {
            text += " " + *artifact->unit;
        }
        return normalize_label(text);
    }
    return normalize_label(std::get<std::string>(*artifact->value));
}

DepthGraph::DepthGraph(std::vector<DepthNode> nodes, std::vector<DepthEdge> edges,
                       AnswerSupport support)
    : nodes_(std::move(nodes)), support_(std::move(support)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const DepthNode& a, const DepthNode& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (nodes_[i - 1].id == nodes_[i].id) {
            throw Error("duplicate depth node id '" + nodes_[i].id + "'");
        }
    }

    std::map<std::tuple<std::string, std::string, DepthRelation>, double> strongest;
    for (const auto& e : edges) {
        if (!(e.confidence > 0.0 && e.confidence <= 1.0)) {
            throw Error("depth edge confidence must lie in (0, 1]");
        }
        if (!find(e.src) || !find(e.dst)) {
            throw Error("depth edge " + e.src + " -> " + e.dst + " references a missing node");
        }
        auto [it, inserted] = strongest.try_emplace({e.src, e.dst, e.relation}, e.confidence);
        if (!inserted) {
            it->second = std::max(it->second, e.confidence);
        }
    }
    for (const auto& [key, confidence] : strongest) {
        edges_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), confidence});
    }

    incoming_.resize(nodes_.size());
    outgoing_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const std::size_t s = index_of(edges_[e].src);
        const std::size_t d = index_of(edges_[e].dst);
        endpoints_.emplace_back(s, d);
        outgoing_[s].push_back(e);
        incoming_[d].push_back(e);
    }
    // edges_ is sorted by (src, dst, relation) so incoming lists are already
    // ordered by source node.
    for (auto it = support_.begin(); it != support_.end();) {
        if (!find(it->first)) {
            throw Error("answer support references missing node '" + it->first + "'");
        }
        it = it->second.empty() ? support_.erase(it) : std::next(it);
    }
    if (!is_acyclic()) {
        throw Error("depth graph contains a cycle");
    }
}

std::optional<std::size_t> DepthGraph::find(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const DepthNode& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t DepthGraph::index_of(std::string_view id) const {
    if (auto idx = find(id)) {
        return *idx;
    }
    throw Error("unknown depth node '" + std::string(id) + "'");
}

std::vector<std::string> DepthGraph::annotations(std::size_t node) const {
    auto it = support_.find(nodes_[node].id);
    if (it == support_.end()) {
        return {};
    }
    return {it->second.begin(), it->second.end()};
}

bool DepthGraph::is_acyclic() const {
    // Kahn's algorithm.
    std::vector<std::size_t> indegree(nodes_.size(), 0);
    for (const auto& [s, d] : endpoints_) {
        ++indegree[d];
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (indegree[i] == 0) ready.push_back(i);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        const std::size_t n = ready.back();
        ready.pop_back();
        ++visited;
        for (std::size_t e : outgoing_[n]) {
            if (--indegree[endpoints_[e].second] == 0) {
                ready.push_back(endpoints_[e].second);
            }
        }
    }
    return visited == nodes_.size();
}

std::variant<DepthRelation, EdgeRejection> admit_edge(const DepthNode& src, const DepthNode& dst) {
    using K = DepthNodeKind;
    const K s = src.kind();
    const K d = dst.kind();

    DepthRelation relation;
    if (s == K::artifact && d == K::action) {
        relation = DepthRelation::consumes;
    } else if (s == K::action && d == K::artifact) {
        relation = DepthRelation::produces;
    } else if (s == K::artifact && d == K::validator) {
        relation = DepthRelation::verified_by;
    } else if (s == K::artifact && d == K::artifact) {
        relation = DepthRelation::carryover;
    } else {
        return EdgeRejection{AdmissionGate::relation_typing,
                             std::string("no relation types ") + std::string(to_string(s)) +
                                 " -> " + std::string(to_string(d))};
    }

    if (!(src.timestamp < dst.timestamp)) {
        return EdgeRejection{AdmissionGate::temporal_order,
                             "source tick " + std::to_string(src.timestamp) +
                                 " is not before target tick " + std::to_string(dst.timestamp)};
    }

    if (relation == DepthRelation::carryover) {
        const auto& a = std::get<ArtifactInfo>(src.payload);
        const auto& b = std::get<ArtifactInfo>(dst.payload);
        const bool a_num = a.value_type == ValueType::number;
        const bool b_num = b.value_type == ValueType::number;
        if (a_num != b_num) {
            return EdgeRejection{AdmissionGate::unit_compatibility,
                                 "carryover between a number and a non-number"};
        }
        if (a_num) {
            if (!a.unit_known || !b.unit_known) {
                return EdgeRejection{AdmissionGate::unit_compatibility,
                                     "unknown unit '" + (!a.unit_known ? *a.unit : *b.unit) + "'"};
            }
            if (a.unit != b.unit) {
                return EdgeRejection{AdmissionGate::unit_compatibility,
                                     "unit " + a.unit.value_or("") + " does not carry over to " +
                                         b.unit.value_or("")};
            }
        }
    }
    return relation;
}

double edge_confidence(double validator_pass_rate, int repeats) {
    const double repeat_term = static_cast<double>(std::clamp(repeats, 0, 3)) / 3.0;
    return std::clamp(0.7 * validator_pass_rate + 0.3 * repeat_term, 0.05, 1.0);
}

std::optional<DepthNode> make_depth_node(const TraceEvent& ev) {
    DepthNode node;
    node.id = ev.run_id + "/" + ev.event_id;
    node.timestamp = ev.timestamp;
    node.source_event = ev.event_id;
    switch (ev.kind) {
        case EventKind::note:
            return std::nullopt;
        case EventKind::action: {
            ActionInfo info;
            info.tool = ev.tool.value_or("");
            info.op_type = ev.op_type.value_or(OpType::other);
            info.params_digest = ev.params_digest;
            info.env_sig = ev.run_id + "@" + ev.branch_id;
            if (ev.unit) {
                info.unit = canonical_unit(*ev.unit).value_or(*ev.unit);
            }
            node.payload = std::move(info);
            break;
        }
        case EventKind::artifact: {
            ArtifactInfo info;
            info.value = ev.value;
            if (ev.value && std::holds_alternative<double>(*ev.value)) {
                info.value_type = ValueType::number;
                const std::string unit = ev.unit.value_or(std::string(kDimensionless));
                if (is_known_unit(unit)) {
                    const Quantity q = normalize_unit(std::get<double>(*ev.value), unit);
                    info.value = q.value;
                    info.unit = q.unit;
                } else {
                    info.unit = unit;
                    info.unit_known = false;
                }
            } else {
                const bool table = ev.value && std::get<std::string>(*ev.value).starts_with('|');
                info.value_type = table ? ValueType::table : ValueType::text;
                info.unit = ev.unit;
                info.unit_known = !ev.unit || is_known_unit(*ev.unit);
            }
            node.payload = std::move(info);
            break;
        }
        case EventKind::validator: {
            ValidatorInfo info;
            info.check_kind = ev.tool.value_or("check");
            info.outcome = ev.status;
            node.payload = std::move(info);
            break;
        }
    }
    return node;
}

DepthBuild build_depth_graph(const Trace& trace) {
    std::map<std::string, const TraceEvent*> events;
    std::map<std::string, DepthNode> nodes;
    AnswerSupport support;
    for (const auto& ev : trace.events) {
        events.emplace(ev.event_id, &ev);
        if (auto node = make_depth_node(ev)) {
            for (const auto& a : ev.answers) {
                support[node->id].insert(a);
            }
            nodes.emplace(ev.event_id, std::move(*node));
        }
    }

    // artifact event -> (passing validators, all validators)
    std::map<std::string, std::pair<int, int>> validation;
    std::map<std::tuple<std::string, OpType, std::string>, int> signatures;
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::validator) {
            for (const auto& input : ev.inputs) {
                auto& [ok, total] = validation[input];
                ++total;
                ok += ev.status == EventStatus::ok ? 1 : 0;
            }
        } else if (ev.kind == EventKind::action) {
            ++signatures[{ev.tool.value_or(""), ev.op_type.value_or(OpType::other), ev.params_digest}];
        }
    }
    auto pass_rate = [&](const std::string& artifact) {
        auto it = validation.find(artifact);
        if (it == validation.end() || it->second.second == 0) {
            return kDefaultPassRate;
        }
        return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    };
    auto repeats = [&](const std::string& action) {
        const TraceEvent& ev = *events.at(action);
        return signatures.at({ev.tool.value_or(""), ev.op_type.value_or(OpType::other),
                              ev.params_digest}) -
               1;
    };

    DepthBuild out;
    std::vector<DepthEdge> edges;
    for (const auto& ev : trace.events) {
        auto dst_it = nodes.find(ev.event_id);
        for (const auto& input : ev.inputs) {
            auto src_event = events.find(input);
            if (src_event == events.end()) {
                if (dst_it != nodes.end()) {
                    out.dropped.push_back({input, dst_it->second.id, AdmissionGate::relation_typing,
                                           "unknown source event"});
                }
                continue;
            }
            auto src_it = nodes.find(input);
            if (dst_it == nodes.end() || src_it == nodes.end()) {
                continue;  // notes live only in the breadth graph
            }
            const DepthNode& src = src_it->second;
            const DepthNode& dst = dst_it->second;
            const auto verdict = admit_edge(src, dst);
            if (const auto* rejection = std::get_if<EdgeRejection>(&verdict)) {
                out.dropped.push_back({src.id, dst.id, rejection->gate, rejection->reason});
                continue;
            }
            const DepthRelation relation = std::get<DepthRelation>(verdict);
            double confidence = 0.0;
            switch (relation) {
                case DepthRelation::consumes:
                    confidence = edge_confidence(pass_rate(input), repeats(ev.event_id));
                    break;
                case DepthRelation::produces:
                    confidence = edge_confidence(pass_rate(ev.event_id), repeats(input));
                    break;
                case DepthRelation::verified_by: {
                    const int checks = validation.count(input) ? validation.at(input).second : 1;
                    confidence = edge_confidence(ev.status == EventStatus::ok ? 1.0 : 0.0, checks - 1);
                    break;
                }
                case DepthRelation::carryover:
                    confidence = edge_confidence(pass_rate(ev.event_id), 0);
                    break;
            }
            edges.push_back({src.id, dst.id, relation, confidence});
        }
    }

    std::vector<DepthNode> node_list;
    for (auto& [_, node] : nodes) {
        node_list.push_back(std::move(node));
    }
    std::sort(out.dropped.begin(), out.dropped.end(), [](const DroppedEdge& a, const DroppedEdge& b) {
        return std::tie(a.src, a.dst, a.gate, a.reason) < std::tie(b.src, b.dst, b.gate, b.reason);
    });
    out.graph = DepthGraph(std::move(node_list), std::move(edges), std::move(support));
    return out;
}

double path_reliability(std::span<const double> edge_confidences, double tau) {
    if (edge_confidences.empty()) {
        throw EmptyPath();
    }
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw Error("reliability exponent must lie in (0, 1]");
    }
    double product = 1.0;
    for (double c : edge_confidences) {
        product *= c;
    }
    return std::pow(product, tau);
}

std::vector<DepthPath> enumerate_admissible_paths(const DepthGraph& graph, std::size_t target,
                                                  std::size_t max_length) {
    if (max_length == 0) {
        throw Error("depth path length bound must be at least 1");
    }
    std::vector<DepthPath> out;
    if (graph.incoming(target).empty()) {
        out.push_back({{target}, {}});
        return out;
    }
    // Built back-to-front, reversed on output.
    std::vector<std::size_t> rev_nodes{target};
    std::vector<std::size_t> rev_edges;
    auto walk = [&](auto&& self, std::size_t node) -> void {
        for (std::size_t e : graph.incoming(node)) {
            const std::size_t pred = graph.edge_src(e);
            rev_nodes.push_back(pred);
            rev_edges.push_back(e);
            out.push_back({{rev_nodes.rbegin(), rev_nodes.rend()}, {rev_edges.rbegin(), rev_edges.rend()}});
            if (rev_edges.size() < max_length) {
                self(self, pred);
            }
            rev_nodes.pop_back();
            rev_edges.pop_back();
        }
    };
    walk(walk, target);
    return out;
}

OpSequence path_ops(const DepthGraph& graph, const DepthPath& path) {
    OpSequence ops;
    for (std::size_t n : path.nodes) {
        const auto& payload = graph.nodes()[n].payload;
        if (const auto* action = std::get_if<ActionInfo>(&payload)) {
            ops.push_back({action->op_type, action->unit});
        } else if (std::holds_alternative<ValidatorInfo>(payload)) {
            ops.push_back({OpType::verify, std::nullopt});
        }
    }
    return ops;
}

std::vector<double> path_confidences(const DepthGraph& graph, const DepthPath& path) {
    std::vector<double> out;
    out.reserve(path.edges.size());
    for (std::size_t e : path.edges) {
        out.push_back(graph.edges()[e].confidence);
    }
    return out;
}

double depth_score(const DepthGraph& graph, const OpSequence& query_ops, std::size_t target,
                   std::size_t max_length, double tau) {
    if (query_ops.empty()) {
        throw EmptyOpSequence();
    }
    double best = 0.0;
    for (const auto& path : enumerate_admissible_paths(graph, target, max_length)) {
        if (path.edges.empty()) {
            continue;
        }
        const double reliability = path_reliability(path_confidences(graph, path), tau);
        const double match = static_cast<double>(lcs_typed(query_ops, path_ops(graph, path))) /
                             static_cast<double>(query_ops.size());
        best = std::max(best, reliability * match);
    }
    return best;
}

double score_depth_path(std::span<const double> edge_confidences, std::size_t lcs,
                        std::size_t query_op_count, double lambda_ord) {
    if (query_op_count == 0) {
        throw EmptyOpSequence();
    }
    double log_weight = 0.0;
    for (double c : edge_confidences) {
        log_weight += std::log(c);
    }
    const double mismatch =
        1.0 - static_cast<double>(lcs) / static_cast<double>(query_op_count);
    return log_weight - lambda_ord * mismatch;
}

}  // namespace dgr
