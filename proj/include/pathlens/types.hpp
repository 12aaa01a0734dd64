#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "pathlens/json.hpp"
#include "pathlens/time.hpp"

namespace pathlens {

// Property values are scalars only; nested objects and arrays are rejected
// at parse time so predicates stay auditable.
using PropertyValue = std::variant<std::string, std::int64_t, double, bool>;
using PropertyMap = std::map<std::string, PropertyValue>;

Json to_json(const PropertyValue& v);
Json to_json(const PropertyMap& m);
PropertyValue property_value_from_json(const Json& j);
PropertyMap property_map_from_json(const Json& j);

std::string property_to_display(const PropertyValue& v);

struct RawEvent {
    std::string event_id;
    std::string actor_id;
    std::string event_name;
    Instant timestamp;
    PropertyMap properties;
    PropertyMap context;

    bool operator==(const RawEvent&) const = default;
};

enum class TerminalOutcome { Converted, Churned, Inactive, Retained, DroppedOff };

inline constexpr std::array<TerminalOutcome, 5> kAllOutcomes = {
    TerminalOutcome::Converted, TerminalOutcome::Churned, TerminalOutcome::Inactive,
    TerminalOutcome::Retained, TerminalOutcome::DroppedOff};

std::string to_string(TerminalOutcome t);
TerminalOutcome outcome_from_string(const std::string& s);

// Entity-id form used in findings and facts, e.g. "outcome:converted".
inline std::string outcome_entity_id(TerminalOutcome t) { return "outcome:" + to_string(t); }

}  // namespace pathlens
