#include "dualgraph/evidence_chain.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "dualgraph/error.hpp"

namespace dgr {

std::vector<EdgeRef> edges_in_path_order(std::span<const ScoredPath> paths) {
    std::vector<EdgeRef> out;
    std::set<EdgeRef> seen;
    for (const auto& p : paths) {
        for (const auto& e : p.edges) {
            if (seen.insert(e).second) out.push_back(e);
        }
    }
    return out;
}

EvidenceChain minimal_evidence_chain(std::span<const ScoredPath> supporting, const ChainProbe& probe,
                                     double delta, std::size_t threads) {
    if (!(delta > 0.0)) throw Error("chain budget must be positive");

    EvidenceChain out;
    const std::vector<EdgeRef> candidates = edges_in_path_order(supporting);
    out.base_prob = probe({});

    std::vector<double> deltas(candidates.size(), 0.0);
    auto evaluate = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < candidates.size(); i += stride) {
            deltas[i] = out.base_prob - probe({candidates[i]});
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, candidates.size()));
    if (workers == 1) {
        evaluate(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(evaluate, w, workers);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out.marginals.push_back({candidates[i], deltas[i]});
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });

    std::set<EdgeRef> pruned;
    out.chain_prob = out.base_prob;
    for (std::size_t i : order) {
        std::set<EdgeRef> trial = pruned;
        trial.insert(candidates[i]);
        const double p = probe(trial);
        if (out.base_prob - p > delta) break;
        pruned = std::move(trial);
        out.chain_prob = p;
    }
    for (const auto& e : candidates) {
        if (!pruned.contains(e)) out.edges.push_back(e);
    }
    return out;
}

}  // namespace dgr
