#pragma once

#include <functional>
#include <set>
#include <span>
#include <vector>

#include "dualgraph/fusion.hpp"

namespace dgr {

struct EdgeMarginal {
    EdgeRef edge;
    double delta = 0.0;  // drop in calibrated P(a*) when the edge is removed

    bool operator==(const EdgeMarginal&) const = default;
};

struct EvidenceChain {
    std::vector<EdgeRef> edges;            // survivors, in path order
    std::vector<EdgeMarginal> marginals;   // every candidate, in path order
    double base_prob = 0.0;
    double chain_prob = 0.0;               // P(a*) with every pruned edge removed
};

/// Calibrated probability of the selected answer with a set of edges
/// removed. Must be a pure function of its argument.
using ChainProbe = std::function<double(const std::set<EdgeRef>& removed)>;

/// Ordered distinct edges of the given paths, first appearance first.
std::vector<EdgeRef> edges_in_path_order(std::span<const ScoredPath> paths);

/// Leave-one-out marginals for every edge on `supporting` paths, then greedy
/// pruning in ascending marginal (ties keep path order). Pruning stops before
/// the step whose cumulative drop would exceed `delta`. Marginals are
/// evaluated on `threads` workers; the result does not depend on the count.
EvidenceChain minimal_evidence_chain(std::span<const ScoredPath> supporting, const ChainProbe& probe,
                                     double delta, std::size_t threads = 1);

}  // namespace dgr
