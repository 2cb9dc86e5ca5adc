#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/embedding.hpp"
#include "dualgraph/trace.hpp"

namespace dgr {

enum class BreadthNodeKind { entity, span, symbol };
enum class BreadthRelation { mentions, defines, aliases, cites, supports, derived_from };

std::string_view to_string(BreadthNodeKind kind);
std::string_view to_string(BreadthRelation relation);
std::optional<BreadthNodeKind> parse_breadth_node_kind(std::string_view text);
std::optional<BreadthRelation> parse_breadth_relation(std::string_view text);

struct BreadthNode {
    std::string id;
    BreadthNodeKind kind = BreadthNodeKind::entity;
    std::string label;
    std::string text;
    std::optional<std::string> source_event;

    bool operator==(const BreadthNode&) const = default;
};

struct BreadthEdge {
    std::string src;
    std::string dst;
    BreadthRelation relation = BreadthRelation::mentions;
    double confidence = 1.0;

    bool operator==(const BreadthEdge&) const = default;
};

/// node id -> explicit answer annotations carried over from the trace.
using AnswerSupport = std::map<std::string, std::set<std::string>>;

struct Incidence {
    std::size_t edge;
    std::size_t neighbor;
};

/// Immutable breadth graph. Nodes are kept sorted by id and edges by
/// (src, dst, relation); parallel edges of one relation collapse to the
/// highest confidence. Traversal ignores edge direction.
class BreadthGraph {
public:
    BreadthGraph() = default;
    BreadthGraph(std::vector<BreadthNode> nodes, std::vector<BreadthEdge> edges,
                 AnswerSupport support = {});

    const std::vector<BreadthNode>& nodes() const noexcept { return nodes_; }
    const std::vector<BreadthEdge>& edges() const noexcept { return edges_; }
    const AnswerSupport& answer_support() const noexcept { return support_; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t index_of(std::string_view id) const;
    std::span<const Incidence> incident(std::size_t node) const { return adjacency_[node]; }
    std::size_t edge_src(std::size_t edge) const { return endpoints_[edge].first; }
    std::size_t edge_dst(std::size_t edge) const { return endpoints_[edge].second; }
    std::vector<std::string> annotations(std::size_t node) const;

    bool operator==(const BreadthGraph& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_ && support_ == other.support_;
    }

private:
    std::vector<BreadthNode> nodes_;
    std::vector<BreadthEdge> edges_;
    AnswerSupport support_;
    std::vector<std::vector<Incidence>> adjacency_;
    std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
};

/// Default edge confidences by relation.
struct BreadthConfidences {
    double mentions = 0.6;
    double aliases = 0.9;
    double defines = 0.8;
    double cites = 0.8;
    double supports_scale = 0.7;  // multiplied by the validator pass rate
    double derived_from = 0.8;
};

/// term -> canonical term
using AliasTable = std::map<std::string, std::string>;

/// Construction rules:
///  - one span node per artifact/note event;
///  - one entity (or symbol) node per distinct normalized term, where terms
///    are `[[...]]` markers in the event text plus an artifact's own value;
///  - span -mentions-> term (span -defines-> term for `[[!term]]`);
///  - term -aliases-> canonical term for entries in `aliases`;
///  - span -supports-> term for artifacts with at least one passing
///    validator, confidence scaled by the pass rate;
///  - span -derived_from-> span along artifact provenance, and
///    span -cites-> span for notes that reference earlier events.
BreadthGraph build_breadth_graph(const Trace& trace, const AliasTable& aliases = {},
                                 const BreadthConfidences& confidences = {});

/// Raw and one-hop smoothed embeddings for every node of one graph.
class BreadthEmbeddings {
public:
    BreadthEmbeddings(const BreadthGraph& graph, const EmbeddingProvider& embedder);

    const Vector& raw(std::size_t node) const { return raw_[node]; }
    const Vector& smoothed(std::size_t node) const { return smoothed_[node]; }

private:
    std::vector<Vector> raw_;
    std::vector<Vector> smoothed_;
};

/// Text that feeds the node encoder.
std::string_view node_embedding_text(const BreadthNode& node);

/// normalize(e(v) + sum_u s(v,u) e(u)) / (1 + sum_u s(v,u)) over distinct
/// neighbours u, using the strongest edge to each neighbour. Isolated nodes
/// and zero sums return e(v) unchanged.
Vector smoothed_embedding(const BreadthGraph& graph, std::size_t node,
                          std::span<const Vector> raw_embeddings);
Vector smoothed_embedding(const BreadthGraph& graph, std::size_t node,
                          const EmbeddingProvider& embedder);

double breadth_score(const BreadthEmbeddings& embeddings, const Vector& query, std::size_t node);

/// Top-k nodes by breadth score, ties by ascending node id.
std::vector<std::size_t> seed_nodes(const BreadthGraph& graph, const BreadthEmbeddings& embeddings,
                                    const Vector& query, std::size_t k);

/// Sum over path nodes of max(0, 1 - cos(query, smoothed(v))).
double offtopic_penalty(const BreadthEmbeddings& embeddings, const Vector& query,
                        std::span<const std::size_t> nodes);

/// sum log s_B(e) - lambda_off * offtopic.
double score_breadth_path(std::span<const double> edge_confidences, double offtopic,
                          double lambda_off);

struct BreadthPath {
    std::vector<std::size_t> nodes;
    std::vector<std::size_t> edges;
    double score = 0.0;

    bool operator==(const BreadthPath&) const = default;
};

/// Orders paths by score (descending), then node sequence, then edge sequence.
bool breadth_path_before(const BreadthPath& a, const BreadthPath& b);

double score_breadth_path(const BreadthGraph& graph, const BreadthEmbeddings& embeddings,
                          const Vector& query, const BreadthPath& path, double lambda_off);

inline constexpr std::size_t kUnboundedBeam = std::numeric_limits<std::size_t>::max();

struct BreadthSearch {
    std::size_t max_length = 5;
    std::size_t beam = 64;
    double lambda_off = 1.0;
    /// Number of answer buckets, and the buckets a terminal node falls into.
    /// Paths whose terminal supports no answer share one extra bucket.
    std::size_t answer_count = 0;
    std::function<std::vector<std::size_t>(std::size_t)> answers_of;
};

/// Simple paths starting at a seed with 1..max_length edges (plus a
/// zero-length path for each seed without incident edges), expanded
/// best-first by score. Scores never increase under extension, so paths are
/// produced in sorted order and each bucket keeps its `beam` best.
std::vector<BreadthPath> enumerate_breadth_paths(const BreadthGraph& graph,
                                                 const BreadthEmbeddings& embeddings,
                                                 std::span<const std::size_t> seeds,
                                                 const Vector& query, const BreadthSearch& search);

}  // namespace dgr
