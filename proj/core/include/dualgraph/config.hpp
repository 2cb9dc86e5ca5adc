#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dualgraph/pipeline.hpp"
#include "dualgraph/theorem.hpp"

namespace dgr {

enum class AggregationMode { signal, subject };

std::string_view to_string(AggregationMode mode);
std::optional<AggregationMode> parse_aggregation_mode(std::string_view text);

struct RunConfig {
    HyperParams params;
    std::string embedder = "reference";  // reference | remote
    std::string endpoint;                // remote embedder URL
    std::size_t dim = 256;
    AggregationMode mode = AggregationMode::signal;
    std::uint64_t rng_seed = 20240601;
    std::size_t threads = 1;
    std::string aliases;           // alias table path, optional
    std::string verifier_command;  // external path verifier, off when empty
    std::string embedding_cache;   // remote embedder cache file, optional
    BreadthConfidences confidences;
    SyntheticScenario scenario;

    /// Range checks for every field. Throws ConfigError.
    void validate() const;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown keys and bad
/// values throw ConfigError with the line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form, every key listed.
std::string format_config(const RunConfig& config);

}  // namespace dgr
