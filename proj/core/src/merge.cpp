#include "dualgraph/merge.hpp"

#include <algorithm>
#include <map>

#include "dualgraph/error.hpp"

namespace dgr {

BreadthGraph merge_breadth_graphs(std::span<const BreadthGraph> graphs) {
    // label -> (kind -> smallest node id with that kind)
    std::map<std::string, std::map<BreadthNodeKind, std::string>> kinds;
    std::map<std::string, BreadthNode> nodes;
    std::vector<BreadthEdge> edges;
    AnswerSupport support;

    for (const auto& g : graphs) {
        for (const auto& n : g.nodes()) {
            auto& by_kind = kinds[n.label];
            auto [kit, fresh] = by_kind.try_emplace(n.kind, n.id);
            if (!fresh) kit->second = std::min(kit->second, n.id);

            auto [it, inserted] = nodes.try_emplace(n.id, n);
            if (!inserted) {
                BreadthNode& merged = it->second;
                if (merged.kind != n.kind) {
                    throw MergeConflict(merged.id, n.id, n.label);
                }
                merged.text = std::min(merged.text, n.text);
                if (!merged.source_event || (n.source_event && *n.source_event < *merged.source_event)) {
                    merged.source_event = n.source_event ? n.source_event : merged.source_event;
                }
            }
        }
        edges.insert(edges.end(), g.edges().begin(), g.edges().end());
        for (const auto& [id, answers] : g.answer_support()) {
            support[id].insert(answers.begin(), answers.end());
        }
    }

    for (const auto& [label, by_kind] : kinds) {
        if (by_kind.size() > 1) {
            auto first = by_kind.begin();
            throw MergeConflict(first->second, std::next(first)->second, label);
        }
    }

    std::vector<BreadthNode> node_list;
    node_list.reserve(nodes.size());
    for (auto& [_, n] : nodes) node_list.push_back(std::move(n));
    return BreadthGraph(std::move(node_list), std::move(edges), std::move(support));
}

DepthGraph merge_depth_graphs(std::span<const DepthGraph> graphs) {
    std::map<std::string, DepthNode> nodes;
    std::vector<DepthEdge> edges;
    AnswerSupport support;
    for (const auto& g : graphs) {
        for (const auto& n : g.nodes()) {
            auto [it, inserted] = nodes.try_emplace(n.id, n);
            if (!inserted && !(it->second == n)) {
                throw MergeConflict(it->second.id, n.id, n.id);
            }
        }
        edges.insert(edges.end(), g.edges().begin(), g.edges().end());
        for (const auto& [id, answers] : g.answer_support()) {
            support[id].insert(answers.begin(), answers.end());
        }
    }
    std::vector<DepthNode> node_list;
    node_list.reserve(nodes.size());
    for (auto& [_, n] : nodes) node_list.push_back(std::move(n));
    return DepthGraph(std::move(node_list), std::move(edges), std::move(support));
}

}  // namespace dgr
