#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dgr {

/// Lowercase alphanumeric tokens; every other byte is a separator.
std::vector<std::string> tokenize(std::string_view text);

/// Canonical form used to compare labels, values and answer strings:
/// lowercased, whitespace collapsed, digit-group commas removed, and a
/// trailing "<number> <unit>" rewritten into its canonical unit when the
/// unit is known ("5 thousand_acres" -> "5000 acre").
std::string normalize_label(std::string_view text);

/// A term marked up in free text as `[[...]]`.
struct MarkedTerm {
    enum class Role { mention, definition, symbol };
    Role role = Role::mention;
    std::string text;
};

/// Extracts `[[term]]`, `[[!term]]` (definition) and `[[$sym]]` (symbol)
/// markers in textual order. Unterminated markers are ignored.
std::vector<MarkedTerm> extract_marked_terms(std::string_view text);

}  // namespace dgr
