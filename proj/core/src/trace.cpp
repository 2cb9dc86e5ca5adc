#include "dualgraph/trace.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dualgraph/error.hpp"

namespace dgr {
namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kEventFields[] = {
    "event_id", "run_id", "timestamp", "kind",  "tool",      "op_type", "params_digest",
    "text",     "value",  "unit",      "inputs", "status", "branch_id", "answers"};

std::string require_string(const json& record, const char* field, std::size_t line_no) {
    const auto it = record.find(field);
    if (it == record.end()) {
        throw MalformedRecord(line_no, std::string("missing field '") + field + "'");
    }
    if (!it->is_string()) {
        throw MalformedRecord(line_no, std::string("field '") + field + "' must be a string");
    }
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& record, const char* field,
                                           std::size_t line_no) {
    const auto it = record.find(field);
    if (it == record.end()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw MalformedRecord(line_no, std::string("field '") + field + "' must be a string");
    }
    return it->get<std::string>();
}

std::vector<std::string> string_list(const json& record, const char* field, std::size_t line_no) {
    std::vector<std::string> out;
    const auto it = record.find(field);
    if (it == record.end()) {
        return out;
    }
    if (!it->is_array()) {
        throw MalformedRecord(line_no, std::string("field '") + field + "' must be a list");
    }
    for (const auto& item : *it) {
        if (!item.is_string()) {
            throw MalformedRecord(line_no, std::string("field '") + field +
                                               "' must contain strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

TraceEvent parse_event(const json& record, std::size_t line_no) {
    for (const auto& [key, _] : record.items()) {
        if (std::find(std::begin(kEventFields), std::end(kEventFields), key) ==
            std::end(kEventFields)) {
            throw MalformedRecord(line_no, "unknown field '" + key + "'");
        }
    }

    TraceEvent ev;
    ev.event_id = require_string(record, "event_id", line_no);
    if (ev.event_id.empty()) {
        throw MalformedRecord(line_no, "empty event_id");
    }
    ev.run_id = require_string(record, "run_id", line_no);

    const auto ts = record.find("timestamp");
    if (ts == record.end() || !ts->is_number_integer() ||
        (ts->is_number_integer() && ts->get<std::int64_t>() < 0)) {
        throw MalformedRecord(line_no, "timestamp must be a non-negative integer");
    }
    ev.timestamp = ts->get<std::int64_t>();

    const auto kind = parse_event_kind(require_string(record, "kind", line_no));
    if (!kind) {
        throw MalformedRecord(line_no, "bad kind");
    }
    ev.kind = *kind;

    ev.tool = optional_string(record, "tool", line_no);
    if (auto op = optional_string(record, "op_type", line_no)) {
        ev.op_type = parse_op_type(*op);
        if (!ev.op_type) {
            throw MalformedRecord(line_no, "bad op_type '" + *op + "'");
        }
    }
    ev.params_digest = optional_string(record, "params_digest", line_no).value_or("");
    ev.text = optional_string(record, "text", line_no).value_or("");

    if (const auto value = record.find("value"); value != record.end()) {
        if (value->is_number()) {
            ev.value = value->get<double>();
        } else if (value->is_string()) {
            ev.value = value->get<std::string>();
        } else {
            throw MalformedRecord(line_no, "value must be a number or a string");
        }
    }
    ev.unit = optional_string(record, "unit", line_no);
    ev.inputs = string_list(record, "inputs", line_no);

    if (auto status = optional_string(record, "status", line_no)) {
        const auto parsed = parse_event_status(*status);
        if (!parsed) {
            throw MalformedRecord(line_no, "bad status '" + *status + "'");
        }
        ev.status = *parsed;
    }
    ev.branch_id = optional_string(record, "branch_id", line_no).value_or("main");
    ev.answers = string_list(record, "answers", line_no);

    if (ev.kind == EventKind::artifact && ev.tool) {
        throw MalformedRecord(line_no, "artifact events carry no tool");
    }
    if (ev.kind == EventKind::action && !ev.op_type) {
        throw MalformedRecord(line_no, "action events require op_type");
    }
    return ev;
}

json event_to_json(const TraceEvent& ev) {
    json out;
    out["event_id"] = ev.event_id;
    out["run_id"] = ev.run_id;
    out["timestamp"] = ev.timestamp;
    out["kind"] = to_string(ev.kind);
    if (ev.tool) {
        out["tool"] = *ev.tool;
    }
    if (ev.op_type) {
        out["op_type"] = to_string(*ev.op_type);
    }
    out["params_digest"] = ev.params_digest;
    out["text"] = ev.text;
    if (ev.value) {
        std::visit([&](const auto& v) { out["value"] = v; }, *ev.value);
    }
    if (ev.unit) {
        out["unit"] = *ev.unit;
    }
    out["inputs"] = ev.inputs;
    out["status"] = to_string(ev.status);
    out["branch_id"] = ev.branch_id;
    if (!ev.answers.empty()) {
        out["answers"] = ev.answers;
    }
    return out;
}

}  // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::action: return "action";
        case EventKind::artifact: return "artifact";
        case EventKind::validator: return "validator";
        case EventKind::note: return "note";
    }
    return "note";
}

std::string_view to_string(OpType op) {
    switch (op) {
        case OpType::search: return "search";
        case OpType::parse: return "parse";
        case OpType::compute: return "compute";
        case OpType::verify: return "verify";
        case OpType::other: return "other";
    }
    return "other";
}

std::string_view to_string(EventStatus status) {
    switch (status) {
        case EventStatus::ok: return "ok";
        case EventStatus::fail: return "fail";
        case EventStatus::retry: return "retry";
    }
    return "ok";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    for (auto k : {EventKind::action, EventKind::artifact, EventKind::validator, EventKind::note}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<OpType> parse_op_type(std::string_view text) {
    for (auto op : {OpType::search, OpType::parse, OpType::compute, OpType::verify, OpType::other}) {
        if (to_string(op) == text) return op;
    }
    return std::nullopt;
}

std::optional<EventStatus> parse_event_status(std::string_view text) {
    for (auto s : {EventStatus::ok, EventStatus::fail, EventStatus::retry}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::string_view to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::temporal_order: return "TemporalOrder";
        case Violation::Kind::dangling_ref: return "DanglingRef";
        case Violation::Kind::duplicate_id: return "DuplicateId";
        case Violation::Kind::kind_invariant: return "KindInvariant";
    }
    return "Unknown";
}

void sort_events(std::vector<TraceEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.event_id < b.event_id;
    });
}

Trace parse_trace(std::string_view bytes) {
    Trace trace;
    bool have_header = false;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    while (pos < bytes.size()) {
        auto end = bytes.find('\n', pos);
        if (end == std::string_view::npos) {
            end = bytes.size();
        }
        std::string_view line = bytes.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedRecord(line_no, std::string("syntax error: ") + e.what());
        }
        if (!record.is_object()) {
            throw MalformedRecord(line_no, "record must be an object");
        }

        if (!have_header) {
            if (!record.contains("schema")) {
                throw MalformedRecord(line_no, "missing trace header record");
            }
            if (record.value("schema", "") != kTraceSchema ||
                record.value("version", 0) != kTraceVersion) {
                throw MalformedRecord(line_no, "unsupported trace schema/version");
            }
            for (const auto& [key, _] : record.items()) {
                if (key != "schema" && key != "version" && key != "run_id" &&
                    key != "question_id") {
                    throw MalformedRecord(line_no, "unknown header field '" + key + "'");
                }
            }
            trace.run_id = require_string(record, "run_id", line_no);
            trace.question_id = require_string(record, "question_id", line_no);
            if (trace.question_id.empty()) {
                throw MalformedRecord(line_no, "empty question_id");
            }
            have_header = true;
            continue;
        }

        TraceEvent ev = parse_event(record, line_no);
        if (!seen.insert(ev.event_id).second) {
            throw DuplicateEventId(ev.event_id);
        }
        trace.events.push_back(std::move(ev));
    }

    if (!have_header) {
        throw MalformedRecord(line_no == 0 ? 1 : line_no, "empty trace: missing header record");
    }
    for (const auto& ev : trace.events) {
        for (const auto& input : ev.inputs) {
            if (!seen.contains(input)) {
                throw DanglingInputRef(ev.event_id, input);
            }
        }
    }
    sort_events(trace.events);
    return trace;
}

Trace parse_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open trace file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str());
}

std::string serialize_trace(const Trace& trace) {
    json header;
    header["schema"] = kTraceSchema;
    header["version"] = kTraceVersion;
    header["run_id"] = trace.run_id;
    header["question_id"] = trace.question_id;

    std::string out = header.dump();
    out.push_back('\n');

    std::vector<TraceEvent> events = trace.events;
    sort_events(events);
    for (const auto& ev : events) {
        out += event_to_json(ev).dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<Violation> validate_trace(const Trace& trace) {
    std::vector<Violation> violations;
    std::map<std::string, std::int64_t> timestamps;
    for (const auto& ev : trace.events) {
        if (!timestamps.emplace(ev.event_id, ev.timestamp).second) {
            violations.push_back({Violation::Kind::duplicate_id, ev.event_id, "duplicate event_id"});
        }
    }
    for (const auto& ev : trace.events) {
        if (ev.kind == EventKind::artifact && ev.tool) {
            violations.push_back(
                {Violation::Kind::kind_invariant, ev.event_id, "artifact carries a tool"});
        }
        if (ev.kind == EventKind::action && !ev.op_type) {
            violations.push_back(
                {Violation::Kind::kind_invariant, ev.event_id, "action without op_type"});
        }
        for (const auto& input : ev.inputs) {
            const auto it = timestamps.find(input);
            if (it == timestamps.end()) {
                violations.push_back(
                    {Violation::Kind::dangling_ref, ev.event_id, "unknown input '" + input + "'"});
            } else if (it->second >= ev.timestamp) {
                violations.push_back({Violation::Kind::temporal_order, ev.event_id,
                                      "input '" + input + "' is not strictly earlier"});
            }
        }
    }
    return violations;
}

}  // namespace dgr
