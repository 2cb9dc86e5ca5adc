#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dualgraph/breadth_graph.hpp"
#include "dualgraph/depth_graph.hpp"
#include "dualgraph/embedding.hpp"
#include "dualgraph/evidence_chain.hpp"
#include "dualgraph/fusion.hpp"
#include "dualgraph/query.hpp"

namespace dgr {

struct HyperParams {
    double lambda_off = 1.0;
    double lambda_ord = 1.0;
    double tau = 0.5;
    double gamma = 1.0;
    double beta = 0.0;
    double delta = 0.05;
    std::size_t max_breadth_length = 5;
    std::size_t max_depth_length = 6;
    std::size_t seeds = 8;
    std::size_t beam = 64;
    double floor = kProbabilityFloor;

    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

struct FusionOutcome {
    std::string question_id;
    std::vector<std::string> answers;
    bool abstained = false;
    std::optional<AnswerDistribution> p_breadth;
    std::optional<AnswerDistribution> p_depth;
    double alpha = 0.5;
    AnswerDistribution p_fused;
    AnswerDistribution p_calibrated;
    std::string map_answer;
    std::vector<EdgeRef> chain;
    std::vector<EdgeMarginal> edge_marginals;
    double chain_prob = 0.0;
    std::vector<ScoredPath> breadth_paths;
    std::vector<ScoredPath> depth_paths;
    OpSequence query_ops;
    HyperParams params;
};

/// Channel distributions, gate and calibrated result for a fixed path set.
struct ChannelState {
    std::optional<AnswerDistribution> breadth;
    std::optional<AnswerDistribution> depth;
    std::optional<ChannelFusion> fusion;  // empty when both channels abstain
    std::optional<AnswerDistribution> calibrated;
};

/// Aggregation, gating, fusion and calibration over already scored paths.
/// Paths using any edge in `removed` are ignored.
ChannelState evaluate_paths(const std::vector<ScoredPath>& breadth_paths,
                            const std::vector<ScoredPath>& depth_paths,
                            const std::vector<std::string>& answers, const HyperParams& params,
                            const std::set<EdgeRef>& removed = {});

/// Optional hard filter over candidate paths. Receives the path and its
/// stitched node text; returning false discards the path.
using PathVerifier = std::function<bool(const ScoredPath& path, const std::string& context)>;

struct ExecutionOptions {
    std::size_t threads = 1;
    PathVerifier verifier;
};

class Engine {
public:
    Engine(BreadthGraph breadth, DepthGraph depth, const EmbeddingProvider& embedder);

    const BreadthGraph& breadth() const noexcept { return breadth_; }
    const DepthGraph& depth() const noexcept { return depth_; }
    const BreadthEmbeddings& embeddings() const noexcept { return embeddings_; }

    std::vector<ScoredPath> breadth_channel(const Query& query, const HyperParams& params) const;
    std::vector<ScoredPath> depth_channel(const Query& query, const OpSequence& query_ops,
                                          const HyperParams& params) const;

    /// The full query pipeline. A query neither channel can support yields
    /// an abstaining outcome rather than an error.
    FusionOutcome run(const Query& query, const HyperParams& params,
                      const ExecutionOptions& options = {}) const;

    std::string path_context(const ScoredPath& path) const;

private:
    BreadthGraph breadth_;
    DepthGraph depth_;
    const EmbeddingProvider& embedder_;
    BreadthEmbeddings embeddings_;
};

/// Text fed to the query encoder: question text followed by seed terms.
std::string query_embedding_text(const Query& query);

}  // namespace dgr
