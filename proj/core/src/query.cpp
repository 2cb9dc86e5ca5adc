#include "dualgraph/query.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "dualgraph/error.hpp"
#include "dualgraph/text.hpp"
#include "dualgraph/units.hpp"

namespace dgr {

void Query::validate() const {
    if (answers.size() < 2) {
        throw InvalidQuery("query '" + question_id + "' needs at least two answers");
    }
    std::set<std::string> ids;
    for (const auto& a : answers) {
        if (a.id.empty()) {
            throw InvalidQuery("empty answer id");
        }
        if (!ids.insert(a.id).second) {
            throw InvalidQuery("duplicate answer id '" + a.id + "'");
        }
    }
}

std::size_t Query::answer_index(std::string_view answer_id) const {
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (answers[i].id == answer_id) {
            return i;
        }
    }
    throw InvalidQuery("unknown answer id '" + std::string(answer_id) + "'");
}

Query parse_query(std::string_view json_text) {
    using json = nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidQuery(std::string("query is not valid JSON: ") + e.what());
    }
    Query q;
    try {
        q.question_id = doc.at("question_id").get<std::string>();
        q.text = doc.at("text").get<std::string>();
        for (const auto& a : doc.at("answers")) {
            q.answers.push_back({a.at("id").get<std::string>(), a.at("display").get<std::string>()});
        }
        if (doc.contains("op_override")) {
            OpSequence ops;
            for (const auto& item : doc["op_override"]) {
                TypedOp op;
                const auto parsed = parse_op_type(item.at("op").get<std::string>());
                if (!parsed) {
                    throw InvalidQuery("unknown op '" + item.at("op").get<std::string>() + "'");
                }
                op.op = *parsed;
                if (item.contains("unit")) {
                    op.unit = item["unit"].get<std::string>();
                }
                ops.push_back(std::move(op));
            }
            q.op_override = std::move(ops);
        }
        if (doc.contains("seed_terms")) {
            q.seed_terms = doc["seed_terms"].get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw InvalidQuery(std::string("malformed query: ") + e.what());
    }
    q.validate();
    return q;
}

OpSequence extract_query_ops(const Query& query) {
    OpSequence ops = query.op_override ? *query.op_override : ops_from_text(query.text);
    if (ops.empty()) {
        throw EmptyOpSequence();
    }
    return ops;
}

AnswerMatcher::AnswerMatcher(const Query& query) {
    for (const auto& a : query.answers) {
        ids_.push_back(a.id);
        displays_.push_back(normalize_label(a.display));
    }
}

std::vector<std::size_t> AnswerMatcher::match(std::string_view normalized_key,
                                              const std::vector<std::string>& annotations) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        bool hit = !normalized_key.empty() && normalized_key == displays_[i];
        for (const auto& note : annotations) {
            if (hit) break;
            hit = note == ids_[i] || normalize_label(note) == displays_[i];
        }
        if (hit) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace dgr
