#pragma once

#include <string>
#include <string_view>

#include "dualgraph/pipeline.hpp"

namespace dgr {

inline constexpr std::string_view kOutcomeFormat = "dualgraph.outcome";
inline constexpr int kOutcomeFormatVersion = 1;

/// Canonical replay record: distributions, gate, answer, chain with
/// marginals, every scored path and the hyperparameters used.
std::string serialize_outcome(const FusionOutcome& outcome);

/// Throws MalformedRecord or SchemaMismatch.
FusionOutcome parse_outcome(std::string_view text);

/// Human-readable summary of the answer and its evidence chain.
std::string explain_outcome(const FusionOutcome& outcome);

}  // namespace dgr
