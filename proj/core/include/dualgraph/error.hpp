#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line_no, const std::string& what)
        : Error("line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class DuplicateEventId : public Error {
public:
    explicit DuplicateEventId(std::string id)
        : Error("duplicate event_id '" + id + "'"), event_id_(std::move(id)) {}
    const std::string& event_id() const noexcept { return event_id_; }

private:
    std::string event_id_;
};

class DanglingInputRef : public Error {
public:
    DanglingInputRef(std::string event_id, std::string missing)
        : Error("event '" + event_id + "' consumes unknown event '" + missing + "'"),
          event_id_(std::move(event_id)), missing_(std::move(missing)) {}
    const std::string& event_id() const noexcept { return event_id_; }
    const std::string& missing() const noexcept { return missing_; }

private:
    std::string event_id_;
    std::string missing_;
};

class UnknownUnit : public Error {
public:
    explicit UnknownUnit(const std::string& unit) : Error("unknown unit '" + unit + "'") {}
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

class EmptyPath : public Error {
public:
    EmptyPath() : Error("path has no edges") {}
};

class EmptyOpSequence : public Error {
public:
    EmptyOpSequence() : Error("no typed operation could be derived for the query") {}
};

class DimMismatch : public Error {
public:
    DimMismatch(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

class NoSupportingPaths : public Error {
public:
    NoSupportingPaths() : Error("no path supports any answer") {}
};

class BothChannelsEmpty : public Error {
public:
    BothChannelsEmpty() : Error("neither channel supports any answer") {}
};

class TransportError : public Error {
public:
    using Error::Error;
};

class BadResponse : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidQuery : public Error {
public:
    using Error::Error;
};

class MergeConflict : public Error {
public:
    MergeConflict(std::string first, std::string second, const std::string& label)
        : Error("label '" + label + "' has conflicting node kinds: " + first + " vs " + second),
          first_(std::move(first)), second_(std::move(second)) {}
    const std::string& first() const noexcept { return first_; }
    const std::string& second() const noexcept { return second_; }

private:
    std::string first_;
    std::string second_;
};

}  // namespace dgr
