#include "pathlens/types.hpp"

#include <cmath>
#include <cstdio>

#include "pathlens/error.hpp"

namespace pathlens {

Json to_json(const PropertyValue& v) {
    return std::visit([](const auto& x) { return Json(x); }, v);
}

Json to_json(const PropertyMap& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = to_json(v);
    return j;
}

PropertyValue property_value_from_json(const Json& j) {
    switch (j.type()) {
        case Json::value_t::string:
            return j.get<std::string>();
        case Json::value_t::number_integer:
        case Json::value_t::number_unsigned:
            return j.get<std::int64_t>();
        case Json::value_t::number_float:
            return j.get<double>();
        case Json::value_t::boolean:
            return j.get<bool>();
        default:
            fail("invalid_property", "property values must be scalar, got " +
                                         std::string(j.type_name()));
    }
}

PropertyMap property_map_from_json(const Json& j) {
    if (!j.is_object()) fail("invalid_property", "property map must be an object");
    PropertyMap m;
    for (const auto& [k, v] : j.items()) m[k] = property_value_from_json(v);
    return m;
}

std::string property_to_display(const PropertyValue& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) return x;
            if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            if constexpr (std::is_same_v<T, double>) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%g", x);
                return buf;
            }
        },
        v);
}

std::string to_string(TerminalOutcome t) {
    switch (t) {
        case TerminalOutcome::Converted: return "converted";
        case TerminalOutcome::Churned: return "churned";
        case TerminalOutcome::Inactive: return "inactive";
        case TerminalOutcome::Retained: return "retained";
        case TerminalOutcome::DroppedOff: return "dropped_off";
    }
    fail("invalid_outcome", "unknown outcome enum value");
}

TerminalOutcome outcome_from_string(const std::string& s) {
    for (TerminalOutcome t : kAllOutcomes)
        if (to_string(t) == s) return t;
    fail("invalid_outcome", "'" + s + "' is not a terminal outcome");
}

}  // namespace pathlens
