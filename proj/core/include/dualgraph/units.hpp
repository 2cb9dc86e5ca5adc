#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace dgr {

struct Quantity {
    double value = 0.0;
    std::string unit;

    bool operator==(const Quantity&) const = default;
};

/// Canonical unit used for plain numbers that carry no unit.
inline constexpr std::string_view kDimensionless = "1";

/// Converts `value` expressed in `unit` to the canonical unit of its
/// dimension. Canonical units map to themselves, so the operation is
/// idempotent. Throws UnknownUnit for units outside the built-in table.
Quantity normalize_unit(double value, std::string_view unit);

/// Canonical unit for `unit`, or nullopt when the unit is not in the table.
std::optional<std::string> canonical_unit(std::string_view unit);

bool is_known_unit(std::string_view unit);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace dgr
