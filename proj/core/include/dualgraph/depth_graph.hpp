#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dualgraph/breadth_graph.hpp"
#include "dualgraph/ops.hpp"
#include "dualgraph/trace.hpp"

namespace dgr {

enum class DepthNodeKind { action, artifact, validator };
enum class DepthRelation { consumes, produces, verified_by, carryover };
enum class ValueType { number, text, table };
enum class AdmissionGate { relation_typing, unit_compatibility, temporal_order };

std::string_view to_string(DepthNodeKind kind);
std::string_view to_string(DepthRelation relation);
std::string_view to_string(ValueType type);
std::string_view to_string(AdmissionGate gate);
std::optional<DepthRelation> parse_depth_relation(std::string_view text);
std::optional<ValueType> parse_value_type(std::string_view text);
std::optional<AdmissionGate> parse_admission_gate(std::string_view text);

struct ActionInfo {
    std::string tool;
    OpType op_type = OpType::other;
    std::string params_digest;
    std::string env_sig;
    std::optional<std::string> unit;

    bool operator==(const ActionInfo&) const = default;
};

struct ArtifactInfo {
    std::optional<ScalarValue> value;
    /// Canonical unit for numbers whose unit is in the table ("1" when the
    /// trace gave none); the raw unit string otherwise.
    std::optional<std::string> unit;
    bool unit_known = true;
    ValueType value_type = ValueType::text;

    bool operator==(const ArtifactInfo&) const = default;
};

struct ValidatorInfo {
    std::string check_kind;
    EventStatus outcome = EventStatus::ok;

    bool operator==(const ValidatorInfo&) const = default;
};

struct DepthNode {
    std::string id;
    std::int64_t timestamp = 0;
    std::variant<ActionInfo, ArtifactInfo, ValidatorInfo> payload;
    std::string source_event;

    DepthNodeKind kind() const { return static_cast<DepthNodeKind>(payload.index()); }
    /// Normalized value text used for answer matching; empty for non-artifacts.
    std::string match_key() const;

    bool operator==(const DepthNode&) const = default;
};

struct DepthEdge {
    std::string src;
    std::string dst;
    DepthRelation relation = DepthRelation::produces;
    double confidence = 1.0;

    bool operator==(const DepthEdge&) const = default;
};

struct EdgeRejection {
    AdmissionGate gate;
    std::string reason;
};

struct DroppedEdge {
    std::string src;
    std::string dst;
    AdmissionGate gate;
    std::string reason;

    bool operator==(const DroppedEdge&) const = default;
};

/// Immutable provenance DAG. Construction rejects cycles.
class DepthGraph {
public:
    DepthGraph() = default;
    DepthGraph(std::vector<DepthNode> nodes, std::vector<DepthEdge> edges, AnswerSupport support = {});

    const std::vector<DepthNode>& nodes() const noexcept { return nodes_; }
    const std::vector<DepthEdge>& edges() const noexcept { return edges_; }
    const AnswerSupport& answer_support() const noexcept { return support_; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t index_of(std::string_view id) const;
    /// Incoming edge indices, ordered by source node then edge index.
    std::span<const std::size_t> incoming(std::size_t node) const { return incoming_[node]; }
    std::span<const std::size_t> outgoing(std::size_t node) const { return outgoing_[node]; }
    std::size_t edge_src(std::size_t edge) const { return endpoints_[edge].first; }
    std::size_t edge_dst(std::size_t edge) const { return endpoints_[edge].second; }
    std::vector<std::string> annotations(std::size_t node) const;

    bool is_acyclic() const;

    bool operator==(const DepthGraph& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_ && support_ == other.support_;
    }

private:
    std::vector<DepthNode> nodes_;
    std::vector<DepthEdge> edges_;
    AnswerSupport support_;
    std::vector<std::vector<std::size_t>> incoming_;
    std::vector<std::vector<std::size_t>> outgoing_;
    std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
};

/// Runs the three admission gates on a candidate edge src -> dst:
/// relation typing (which also fixes the relation), strict temporal order,
/// and unit compatibility for artifact-to-artifact carryover.
std::variant<DepthRelation, EdgeRejection> admit_edge(const DepthNode& src, const DepthNode& dst);

/// clamp(0.7 * pass_rate + 0.3 * min(repeats, 3) / 3, 0.05, 1).
double edge_confidence(double validator_pass_rate, int repeats);

/// Pass rate assumed for edges with no validator downstream.
inline constexpr double kDefaultPassRate = 0.5;

struct DepthBuild {
    DepthGraph graph;
    std::vector<DroppedEdge> dropped;
};

/// One node per action/artifact/validator event; one candidate edge per
/// input reference; inadmissible candidates are reported, not fatal.
DepthBuild build_depth_graph(const Trace& trace);

/// Node for one trace event (notes have none).
std::optional<DepthNode> make_depth_node(const TraceEvent& event);

/// (prod s_D(e))^tau. Throws EmptyPath.
double path_reliability(std::span<const double> edge_confidences, double tau);

struct DepthPath {
    std::vector<std::size_t> nodes;  // forward order, ending at the target
    std::vector<std::size_t> edges;

    bool operator==(const DepthPath&) const = default;
};

/// All directed paths with at most `max_length` edges that end at `target`,
/// in depth-first order over sorted predecessors. A target with no incoming
/// edges yields its zero-length path.
std::vector<DepthPath> enumerate_admissible_paths(const DepthGraph& graph, std::size_t target,
                                                  std::size_t max_length);

/// Action ops (with their unit) and validators (as verify) along the path.
OpSequence path_ops(const DepthGraph& graph, const DepthPath& path);

std::vector<double> path_confidences(const DepthGraph& graph, const DepthPath& path);

/// max over paths with at least one edge of R(p) * LCS(O_q, O_p) / |O_q|;
/// 0 when there is none. Throws EmptyOpSequence.
double depth_score(const DepthGraph& graph, const OpSequence& query_ops, std::size_t target,
                   std::size_t max_length, double tau);

/// sum log s_D(e) - lambda_ord * (1 - lcs / |O_q|). Throws EmptyOpSequence.
double score_depth_path(std::span<const double> edge_confidences, std::size_t lcs,
                        std::size_t query_op_count, double lambda_ord);

}  // namespace dgr
