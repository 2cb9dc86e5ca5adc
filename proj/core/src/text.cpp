#include "dualgraph/text.hpp"

#include <cctype>
#include <charconv>
#include <optional>

#include "dualgraph/units.hpp"

namespace dgr {
namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    const char* first = s.data();
    if (*first == '+') {
        ++first;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (is_alnum(c)) {
            current.push_back(to_lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::string normalize_label(std::string_view text) {
    std::string collapsed;
    collapsed.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (is_space(c)) {
            pending_space = !collapsed.empty();
            continue;
        }
        // digit-group separators: "60,000" -> "60000"
        if (c == ',' && i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) &&
            is_digit(text[i + 1]) && !pending_space) {
            continue;
        }
        if (pending_space) {
            collapsed.push_back(' ');
            pending_space = false;
        }
        collapsed.push_back(to_lower(c));
    }

    const auto space = collapsed.find(' ');
    if (space == std::string::npos) {
        if (auto number = parse_number(collapsed)) {
            return format_number(*number);
        }
        return collapsed;
    }
    if (collapsed.find(' ', space + 1) != std::string::npos) {
        return collapsed;
    }
    const auto number = parse_number(std::string_view(collapsed).substr(0, space));
    const std::string_view unit = std::string_view(collapsed).substr(space + 1);
    if (!number || !is_known_unit(unit)) {
        return collapsed;
    }
    const Quantity q = normalize_unit(*number, unit);
    if (q.unit == kDimensionless) {
        return format_number(q.value);
    }
    return format_number(q.value) + " " + q.unit;
}

std::vector<MarkedTerm> extract_marked_terms(std::string_view text) {
    std::vector<MarkedTerm> terms;
    std::size_t pos = 0;
    while ((pos = text.find("[[", pos)) != std::string_view::npos) {
        const auto close = text.find("]]", pos + 2);
        if (close == std::string_view::npos) {
            break;
        }
        std::string_view body = text.substr(pos + 2, close - pos - 2);
        MarkedTerm term;
        if (!body.empty() && body.front() == '!') {
            term.role = MarkedTerm::Role::definition;
            body.remove_prefix(1);
        } else if (!body.empty() && body.front() == '$') {
            term.role = MarkedTerm::Role::symbol;
            body.remove_prefix(1);
        }
        term.text = std::string(body);
        if (!normalize_label(term.text).empty()) {
            terms.push_back(std::move(term));
        }
        pos = close + 2;
    }
    return terms;
}

}  // namespace dgr
