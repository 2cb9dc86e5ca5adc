#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/trace.hpp"

namespace dgr {

/// One typed operation: its kind and, for unit-bearing steps, the canonical
/// unit of the quantity it handles.
struct TypedOp {
    OpType op = OpType::other;
    std::optional<std::string> unit;

    bool operator==(const TypedOp&) const = default;
};

using OpSequence = std::vector<TypedOp>;

/// Two ops match when their types agree and their units are compatible:
/// both absent, or equal after canonicalization.
bool ops_compatible(const TypedOp& a, const TypedOp& b);

/// Longest common subsequence counting only compatible matches.
std::size_t lcs_typed(const OpSequence& a, const OpSequence& b);

/// Keyword rule table applied in textual order, adjacent repeats removed.
/// May return an empty sequence.
OpSequence ops_from_text(std::string_view text);

std::string format_ops(const OpSequence& ops);

}  // namespace dgr
