#include "dualgraph/units.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "dualgraph/error.hpp"

namespace dgr {
namespace {

struct UnitEntry {
    std::string_view name;
    std::string_view canonical;
    double scale;
};

// length, area, count, time, steps; scale converts to the canonical unit.
constexpr std::array kUnitTable{
    UnitEntry{"1", "1", 1.0},
    UnitEntry{"m", "m", 1.0},
    UnitEntry{"meter", "m", 1.0},
    UnitEntry{"meters", "m", 1.0},
    UnitEntry{"metre", "m", 1.0},
    UnitEntry{"km", "m", 1000.0},
    UnitEntry{"cm", "m", 0.01},
    UnitEntry{"mm", "m", 0.001},
    UnitEntry{"ft", "m", 0.3048},
    UnitEntry{"feet", "m", 0.3048},
    UnitEntry{"mile", "m", 1609.344},
    UnitEntry{"miles", "m", 1609.344},
    UnitEntry{"acre", "acre", 1.0},
    UnitEntry{"acres", "acre", 1.0},
    UnitEntry{"thousand_acres", "acre", 1000.0},
    UnitEntry{"hectare", "acre", 2.4710538146716532},
    UnitEntry{"hectares", "acre", 2.4710538146716532},
    UnitEntry{"person", "person", 1.0},
    UnitEntry{"persons", "person", 1.0},
    UnitEntry{"people", "person", 1.0},
    UnitEntry{"thousand_persons", "person", 1000.0},
    UnitEntry{"second", "second", 1.0},
    UnitEntry{"seconds", "second", 1.0},
    UnitEntry{"s", "second", 1.0},
    UnitEntry{"minute", "second", 60.0},
    UnitEntry{"minutes", "second", 60.0},
    UnitEntry{"hour", "second", 3600.0},
    UnitEntry{"hours", "second", 3600.0},
    UnitEntry{"day", "second", 86400.0},
    UnitEntry{"days", "second", 86400.0},
    UnitEntry{"step", "step", 1.0},
    UnitEntry{"steps", "step", 1.0},
    UnitEntry{"thousand_steps", "step", 1000.0},
    UnitEntry{"million_steps", "step", 1.0e6},
};

const UnitEntry* find_unit(std::string_view unit) {
    for (const auto& entry : kUnitTable) {
        if (entry.name == unit) {
            return &entry;
        }
    }
    return nullptr;
}

}  // namespace

Quantity normalize_unit(double value, std::string_view unit) {
    const UnitEntry* entry = find_unit(unit);
    if (entry == nullptr) {
        throw UnknownUnit(std::string(unit));
    }
    return {value * entry->scale, std::string(entry->canonical)};
}

std::optional<std::string> canonical_unit(std::string_view unit) {
    if (const UnitEntry* entry = find_unit(unit)) {
        return std::string(entry->canonical);
    }
    return std::nullopt;
}

bool is_known_unit(std::string_view unit) { return find_unit(unit) != nullptr; }

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";
    }
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf.data(), end);
}

}  // namespace dgr
