#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/ops.hpp"

namespace dgr {

struct AnswerOption {
    std::string id;
    std::string display;

    bool operator==(const AnswerOption&) const = default;
};

struct Query {
    std::string question_id;
    std::string text;
    std::vector<AnswerOption> answers;
    std::optional<OpSequence> op_override;
    std::vector<std::string> seed_terms;

    /// Throws InvalidQuery unless there are at least two answers with unique ids.
    void validate() const;
    std::size_t answer_index(std::string_view answer_id) const;
};

/// JSON query file:
///   {"question_id": "...", "text": "...",
///    "answers": [{"id": "...", "display": "..."}],
///    "op_override": [{"op": "compute", "unit": "acre"}],   (optional)
///    "seed_terms": ["..."]}                                  (optional)
Query parse_query(std::string_view json_text);

/// The override when present, otherwise the keyword rules over the text.
/// Throws EmptyOpSequence when neither yields an operation.
OpSequence extract_query_ops(const Query& query);

/// Matches node labels/values against answer display strings after label
/// normalization, and explicit annotations against ids or display strings.
class AnswerMatcher {
public:
    explicit AnswerMatcher(const Query& query);

    /// Indices (into Query::answers) supported by a node with the given
    /// normalized key and explicit annotations.
    std::vector<std::size_t> match(std::string_view normalized_key,
                                   const std::vector<std::string>& annotations) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> displays_;
};

}  // namespace dgr
