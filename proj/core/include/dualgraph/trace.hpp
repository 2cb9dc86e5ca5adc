#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dgr {

enum class EventKind { action, artifact, validator, note };
enum class OpType { search, parse, compute, verify, other };
enum class EventStatus { ok, fail, retry };

std::string_view to_string(EventKind kind);
std::string_view to_string(OpType op);
std::string_view to_string(EventStatus status);
std::optional<EventKind> parse_event_kind(std::string_view text);
std::optional<OpType> parse_op_type(std::string_view text);
std::optional<EventStatus> parse_event_status(std::string_view text);

/// A scalar payload: a number or a string.
using ScalarValue = std::variant<double, std::string>;

/// One step of an agent run: an action (tool call), an artifact it produced,
/// a validator outcome, or a free-text note.
struct TraceEvent {
    std::string event_id;
    std::string run_id;
    std::int64_t timestamp = 0;
    EventKind kind = EventKind::note;
    std::optional<std::string> tool;
    std::optional<OpType> op_type;
    std::string params_digest;
    std::string text;
    std::optional<ScalarValue> value;
    std::optional<std::string> unit;
    std::vector<std::string> inputs;
    EventStatus status = EventStatus::ok;
    std::string branch_id = "main";
    // Explicit answer annotations (answer ids or display strings).
    std::vector<std::string> answers;

    bool operator==(const TraceEvent&) const = default;
};

struct Trace {
    std::string run_id;
    std::string question_id;
    std::vector<TraceEvent> events;

    bool operator==(const Trace&) const = default;
};

inline constexpr std::string_view kTraceSchema = "dualgraph.trace";
inline constexpr int kTraceVersion = 1;

/// Orders events by (timestamp, event_id).
void sort_events(std::vector<TraceEvent>& events);

/// Parses newline-delimited trace records: one header record followed by one
/// event per line. The whole input is rejected on the first bad record.
/// Throws MalformedRecord, DuplicateEventId or DanglingInputRef.
Trace parse_trace(std::string_view bytes);
Trace parse_trace_file(const std::filesystem::path& path);

/// Canonical bytes: fixed field order, no insignificant whitespace, events in
/// sorted order, one trailing newline per record.
std::string serialize_trace(const Trace& trace);

struct Violation {
    enum class Kind { temporal_order, dangling_ref, duplicate_id, kind_invariant };
    Kind kind;
    std::string event_id;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

std::string_view to_string(Violation::Kind kind);

/// Every reason the trace is not admissible for graph building. Empty iff
/// admissible.
std::vector<Violation> validate_trace(const Trace& trace);

}  // namespace dgr
