#include "dualgraph/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dualgraph/error.hpp"

namespace dgr {
namespace {

using json = nlohmann::ordered_json;

json header(std::string_view format, std::size_t nodes, std::size_t edges) {
    json h;
    h["format"] = format;
    h["version"] = kGraphFormatVersion;
    h["nodes"] = nodes;
    h["edges"] = edges;
    return h;
}

void append(std::string& out, const json& record) {
    out += record.dump();
    out += '\n';
}

void add_answers(json& record, const AnswerSupport& support, const std::string& id) {
    if (auto it = support.find(id); it != support.end() && !it->second.empty()) {
        record["answers"] = it->second;
    }
}

struct Lines {
    std::vector<std::pair<std::size_t, json>> records;
};

Lines split_records(std::string_view bytes) {
    Lines out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= bytes.size()) {
        std::size_t end = bytes.find('\n', pos);
        if (end == std::string_view::npos) end = bytes.size();
        std::string_view line = bytes.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw MalformedRecord(line_no, "not a JSON object");
        }
        out.records.emplace_back(line_no, std::move(record));
    }
    if (out.records.empty()) {
        throw MalformedRecord(1, "empty graph file");
    }
    return out;
}

template <typename T>
T field(const json& record, const char* name, std::size_t line_no) {
    auto it = record.find(name);
    if (it == record.end()) {
        throw MalformedRecord(line_no, std::string("missing field '") + name + "'");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw MalformedRecord(line_no, std::string("bad field '") + name + "'");
    }
}

std::optional<std::string> optional_field(const json& record, const char* name,
                                          std::size_t line_no) {
    if (!record.contains(name)) return std::nullopt;
    return field<std::string>(record, name, line_no);
}

void check_header(const Lines& lines, std::string_view format) {
    const auto& [line_no, h] = lines.records.front();
    if (h.value("format", "") != format) {
        throw SchemaMismatch("expected a " + std::string(format) + " file");
    }
    if (h.value("version", 0) != kGraphFormatVersion) {
        throw SchemaMismatch("unsupported " + std::string(format) + " version");
    }
}

void read_answers(const json& record, const std::string& id, std::size_t line_no,
                  AnswerSupport& support) {
    if (!record.contains("answers")) return;
    for (auto& a : field<std::vector<std::string>>(record, "answers", line_no)) {
        support[id].insert(std::move(a));
    }
}

template <typename Enum>
Enum require_enum(std::optional<Enum> parsed, const std::string& text) {
    if (!parsed) {
        throw SchemaMismatch("unknown value '" + text + "'");
    }
    return *parsed;
}

}  // namespace

std::string serialize_breadth_graph(const BreadthGraph& graph) {
    std::string out;
    append(out, header(kBreadthFormat, graph.nodes().size(), graph.edges().size()));
    for (const auto& n : graph.nodes()) {
        json r;
        r["record"] = "node";
        r["id"] = n.id;
        r["kind"] = to_string(n.kind);
        r["label"] = n.label;
        r["text"] = n.text;
        if (n.source_event) r["source_event"] = *n.source_event;
        add_answers(r, graph.answer_support(), n.id);
        append(out, r);
    }
    for (const auto& e : graph.edges()) {
        json r;
        r["record"] = "edge";
        r["src"] = e.src;
        r["dst"] = e.dst;
        r["relation"] = to_string(e.relation);
        r["confidence"] = e.confidence;
        append(out, r);
    }
    return out;
}

BreadthGraph parse_breadth_graph(std::string_view bytes) {
    const Lines lines = split_records(bytes);
    check_header(lines, kBreadthFormat);
    std::vector<BreadthNode> nodes;
    std::vector<BreadthEdge> edges;
    AnswerSupport support;
    for (std::size_t i = 1; i < lines.records.size(); ++i) {
        const auto& [line_no, r] = lines.records[i];
        const auto kind = field<std::string>(r, "record", line_no);
        if (kind == "node") {
            BreadthNode n;
            n.id = field<std::string>(r, "id", line_no);
            const auto k = field<std::string>(r, "kind", line_no);
            n.kind = require_enum(parse_breadth_node_kind(k), k);
            n.label = field<std::string>(r, "label", line_no);
            n.text = field<std::string>(r, "text", line_no);
            n.source_event = optional_field(r, "source_event", line_no);
            read_answers(r, n.id, line_no, support);
            nodes.push_back(std::move(n));
        } else if (kind == "edge") {
            BreadthEdge e;
            e.src = field<std::string>(r, "src", line_no);
            e.dst = field<std::string>(r, "dst", line_no);
            const auto rel = field<std::string>(r, "relation", line_no);
            e.relation = require_enum(parse_breadth_relation(rel), rel);
            e.confidence = field<double>(r, "confidence", line_no);
            edges.push_back(std::move(e));
        } else {
            throw SchemaMismatch("unknown record type '" + kind + "'");
        }
    }
    return BreadthGraph(std::move(nodes), std::move(edges), std::move(support));
}

std::string serialize_depth_graph(const DepthGraph& graph) {
    std::string out;
    append(out, header(kDepthFormat, graph.nodes().size(), graph.edges().size()));
    for (const auto& n : graph.nodes()) {
        json r;
        r["record"] = "node";
        r["id"] = n.id;
        r["kind"] = to_string(n.kind());
        r["timestamp"] = n.timestamp;
        r["source_event"] = n.source_event;
        if (const auto* a = std::get_if<ActionInfo>(&n.payload)) {
            r["tool"] = a->tool;
            r["op_type"] = to_string(a->op_type);
            r["params_digest"] = a->params_digest;
            r["env_sig"] = a->env_sig;
            if (a->unit) r["unit"] = *a->unit;
        } else if (const auto* a = std::get_if<ArtifactInfo>(&n.payload)) {
            r["value_type"] = to_string(a->value_type);
            if (a->value) {
                std::visit([&](const auto& v) { r["value"] = v; }, *a->value);
            }
            if (a->unit) r["unit"] = *a->unit;
            r["unit_known"] = a->unit_known;
        } else {
            const auto& v = std::get<ValidatorInfo>(n.payload);
            r["check_kind"] = v.check_kind;
            r["outcome"] = to_string(v.outcome);
        }
        add_answers(r, graph.answer_support(), n.id);
        append(out, r);
    }
    for (const auto& e : graph.edges()) {
        json r;
        r["record"] = "edge";
        r["src"] = e.src;
        r["dst"] = e.dst;
        r["relation"] = to_string(e.relation);
        r["confidence"] = e.confidence;
        append(out, r);
    }
    return out;
}

DepthGraph parse_depth_graph(std::string_view bytes) {
    const Lines lines = split_records(bytes);
    check_header(lines, kDepthFormat);
    std::vector<DepthNode> nodes;
    std::vector<DepthEdge> edges;
    AnswerSupport support;
    for (std::size_t i = 1; i < lines.records.size(); ++i) {
        const auto& [line_no, r] = lines.records[i];
        const auto record = field<std::string>(r, "record", line_no);
        if (record == "node") {
            DepthNode n;
            n.id = field<std::string>(r, "id", line_no);
            n.timestamp = field<std::int64_t>(r, "timestamp", line_no);
            n.source_event = field<std::string>(r, "source_event", line_no);
            const auto kind = field<std::string>(r, "kind", line_no);
            if (kind == "action") {
                ActionInfo a;
                a.tool = field<std::string>(r, "tool", line_no);
                const auto op = field<std::string>(r, "op_type", line_no);
                a.op_type = require_enum(parse_op_type(op), op);
                a.params_digest = field<std::string>(r, "params_digest", line_no);
                a.env_sig = field<std::string>(r, "env_sig", line_no);
                a.unit = optional_field(r, "unit", line_no);
                n.payload = std::move(a);
            } else if (kind == "artifact") {
                ArtifactInfo a;
                const auto vt = field<std::string>(r, "value_type", line_no);
                a.value_type = require_enum(parse_value_type(vt), vt);
                if (auto it = r.find("value"); it != r.end()) {
                    if (it->is_number()) {
                        a.value = it->get<double>();
                    } else if (it->is_string()) {
                        a.value = it->get<std::string>();
                    } else {
                        throw MalformedRecord(line_no, "value must be a number or a string");
                    }
                }
                a.unit = optional_field(r, "unit", line_no);
                a.unit_known = field<bool>(r, "unit_known", line_no);
                n.payload = std::move(a);
            } else if (kind == "validator") {
                ValidatorInfo v;
                v.check_kind = field<std::string>(r, "check_kind", line_no);
                const auto outcome = field<std::string>(r, "outcome", line_no);
                v.outcome = require_enum(parse_event_status(outcome), outcome);
                n.payload = std::move(v);
            } else {
                throw SchemaMismatch("unknown depth node kind '" + kind + "'");
            }
            read_answers(r, n.id, line_no, support);
            nodes.push_back(std::move(n));
        } else if (record == "edge") {
            DepthEdge e;
            e.src = field<std::string>(r, "src", line_no);
            e.dst = field<std::string>(r, "dst", line_no);
            const auto rel = field<std::string>(r, "relation", line_no);
            e.relation = require_enum(parse_depth_relation(rel), rel);
            e.confidence = field<double>(r, "confidence", line_no);
            edges.push_back(std::move(e));
        } else {
            throw SchemaMismatch("unknown record type '" + record + "'");
        }
    }
    return DepthGraph(std::move(nodes), std::move(edges), std::move(support));
}

std::string serialize_dropped_edges(const std::vector<DroppedEdge>& dropped) {
    std::string out;
    for (const auto& d : dropped) {
        json r;
        r["src"] = d.src;
        r["dst"] = d.dst;
        r["gate"] = to_string(d.gate);
        r["reason"] = d.reason;
        append(out, r);
    }
    return out;
}

AliasTable parse_alias_table(std::string_view json_text) {
    const json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw MalformedRecord(1, "alias table must be a JSON object");
    }
    AliasTable out;
    for (const auto& [term, canonical] : j.items()) {
        if (!canonical.is_string()) {
            throw MalformedRecord(1, "alias for '" + term + "' must be a string");
        }
        out.emplace(term, canonical.get<std::string>());
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dgr
