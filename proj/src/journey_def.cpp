#include "pathlens/journey_def.hpp"

#include <algorithm>

#include "pathlens/error.hpp"

namespace pathlens {

std::string to_string(StateLevel level) {
    switch (level) {
        case StateLevel::RawEvent: return "raw_event";
        case StateLevel::Semantic: return "semantic";
        case StateLevel::Lifecycle: return "lifecycle";
    }
    fail("invalid_level", "unknown level enum value");
}

StateLevel state_level_from_string(const std::string& s) {
    for (StateLevel l : {StateLevel::RawEvent, StateLevel::Semantic, StateLevel::Lifecycle})
        if (to_string(l) == s) return l;
    fail("invalid_level", "'" + s + "' is not a state level");
}

JourneyDefinition validate_journey_definition(const JourneyDefinition& def,
                                              const std::set<std::string>& known_states) {
    if (def.terminal_map.empty())
        fail("empty_terminal_map", "journey '" + def.journey_id + "' maps no terminal states");
    if (def.start_states.empty())
        fail("unknown_state", "journey '" + def.journey_id + "' declares no start states");
    if (def.inactivity_timeout.ms <= 0)
        fail("non_positive_length", "inactivity_timeout must be > 0");

    for (const auto& s : def.start_states) {
        if (!known_states.count(s)) fail("unknown_state", s);
        if (def.terminal_map.count(s)) fail("overlapping_start_terminal", s);
    }
    for (const auto& [s, outcome] : def.terminal_map) {
        (void)outcome;
        if (!known_states.count(s)) fail("unknown_state", s);
    }
    return def;
}

Json journey_def_to_json(const JourneyDefinition& def) {
    Json tm = Json::object();
    for (const auto& [s, t] : def.terminal_map) tm[s] = to_string(t);
    Json levels = Json::array();
    for (StateLevel l : def.levels) levels.push_back(to_string(l));
    return Json{{"journey_id", def.journey_id},
                {"start_states", def.start_states},
                {"terminal_map", tm},
                {"inactivity_timeout_ms", def.inactivity_timeout.ms},
                {"timeout_outcome", to_string(def.timeout_outcome)},
                {"session_gap_ms", def.session_gap.ms},
                {"levels", levels}};
}

JourneyDefinition journey_def_from_json(const Json& j) {
    JourneyDefinition def;
    def.journey_id = j.at("journey_id").get<std::string>();
    def.start_states = j.at("start_states").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("terminal_map").items())
        def.terminal_map[k] = outcome_from_string(v.get<std::string>());
    def.inactivity_timeout = Duration{j.at("inactivity_timeout_ms").get<std::int64_t>()};
    def.timeout_outcome = outcome_from_string(j.at("timeout_outcome").get<std::string>());
    def.session_gap = Duration{j.at("session_gap_ms").get<std::int64_t>()};
    if (j.contains("levels")) {
        def.levels.clear();
        for (const auto& l : j.at("levels"))
            def.levels.insert(state_level_from_string(l.get<std::string>()));
    }
    return def;
}

}  // namespace pathlens
