#include "dualgraph/ops.hpp"

#include <algorithm>

#include "dualgraph/text.hpp"
#include "dualgraph/units.hpp"

namespace dgr {

bool ops_compatible(const TypedOp& a, const TypedOp& b) {
    if (a.op != b.op) {
        return false;
    }
    if (!a.unit && !b.unit) {
        return true;
    }
    if (!a.unit || !b.unit) {
        return false;
    }
    const auto ca = canonical_unit(*a.unit);
    const auto cb = canonical_unit(*b.unit);
    if (!ca || !cb) {
        return false;
    }
    return *ca == *cb;
}

namespace {

// Canonical unit per op, resolved once per sequence rather than per DP cell.
// Unknown units become nullopt-with-flag so they never match.
struct ResolvedOp {
    OpType op;
    bool has_unit;
    std::optional<std::string> canonical;
};

std::vector<ResolvedOp> resolve(const OpSequence& ops) {
    std::vector<ResolvedOp> out;
    out.reserve(ops.size());
    for (const auto& o : ops) {
        out.push_back({o.op, o.unit.has_value(), o.unit ? canonical_unit(*o.unit) : std::nullopt});
    }
    return out;
}

bool resolved_compatible(const ResolvedOp& a, const ResolvedOp& b) {
    if (a.op != b.op || a.has_unit != b.has_unit) return false;
    if (!a.has_unit) return true;
    return a.canonical && b.canonical && *a.canonical == *b.canonical;
}

}  // namespace

std::size_t lcs_typed(const OpSequence& a, const OpSequence& b) {
    const auto ra = resolve(a);
    const auto rb = resolve(b);
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (resolved_compatible(ra[i - 1], rb[j - 1])) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

OpSequence ops_from_text(std::string_view text) {
    struct Rule {
        std::vector<std::string_view> words;
        OpType op;
    };
    // Two-word phrases are listed first so they win over their prefixes.
    static const std::vector<Rule> rules = {
        {{"look", "up"}, OpType::search},  {{"find"}, OpType::search},
        {{"search"}, OpType::search},      {{"retrieve"}, OpType::search},
        {{"read"}, OpType::parse},         {{"extract"}, OpType::parse},
        {{"parse"}, OpType::parse},        {{"simulate"}, OpType::compute},
        {{"run"}, OpType::compute},        {{"count"}, OpType::compute},
        {{"compute"}, OpType::compute},    {{"calculate"}, OpType::compute},
        {{"check"}, OpType::verify},       {{"confirm"}, OpType::verify},
        {{"verify"}, OpType::verify},      {{"validate"}, OpType::verify},
    };

    const auto tokens = tokenize(text);
    OpSequence ops;
    for (std::size_t i = 0; i < tokens.size();) {
        std::size_t consumed = 1;
        for (const auto& rule : rules) {
            if (i + rule.words.size() > tokens.size()) {
                continue;
            }
            bool hit = true;
            for (std::size_t w = 0; w < rule.words.size(); ++w) {
                if (tokens[i + w] != rule.words[w]) {
                    hit = false;
                    break;
                }
            }
            if (hit) {
                if (ops.empty() || ops.back().op != rule.op) {
                    ops.push_back({rule.op, std::nullopt});
                }
                consumed = rule.words.size();
                break;
            }
        }
        i += consumed;
    }
    return ops;
}

std::string format_ops(const OpSequence& ops) {
    std::string out;
    for (const auto& op : ops) {
        if (!out.empty()) {
            out += ' ';
        }
        out += to_string(op.op);
        if (op.unit) {
            out += '(' + *op.unit + ')';
        }
    }
    return out;
}

}  // namespace dgr
